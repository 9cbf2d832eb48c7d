#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rbfood/layers.hpp"
#include "rbfood/rbf_head.hpp"
#include "rbfood/tensor.hpp"

namespace rbfood {

struct LossBreakdown {
    double l_in = 0.0;
    double l_bd = 0.0;
    double l_reg = 0.0;
    double total = 0.0;
};

LossBreakdown total_loss(double l_in, double l_bd, double l_reg);

// Mean over rows of -sum_c [y_c log h_c + (1-y_c) log(1-h_c)], with log
// arguments clamped at 1e-7 (gradient zero inside the clamp zone). `h` and
// `y` are (N,C); y rows are one-hot for in-distribution pixels and all-zero
// for boundary pixels. dh, if given, receives d(loss)/dh.
double score_bce(const Tensor& h, const Tensor& y, Tensor* dh);

double in_dist_loss(const Tensor& h, const Tensor& y_one_hot, Tensor* dh);

// score_bce against all-zero targets; an empty batch contributes 0.
double boundary_loss(const Tensor& h_boundary, Tensor* dh);

// lambda * mean_i (||grad_x sum_c h_c||^2 - 1)^2 over the leading axis of
// `inputs`, for the model formed by running `stack` and then the head on
// every feature row the stack produces.
struct GpResult {
    double penalty = 0.0;
    std::vector<double> grad_norm_sq;  // per sample
    StackGrads stack_grads;            // only when with_param_grads
    Tensor dlogits;                    // only when with_param_grads
};

// Parameter gradients avoid second-order backprop: for each sample the
// penalty needs d/dtheta of n_i = ||g_i||^2 with g_i = grad_x S, and
// grad_theta n_i = [grad_theta S(x_i + eps_i g_i) - grad_theta S(x_i - eps_i g_i)] / eps_i
// with g_i held constant, so two extra batched passes suffice. eps_i is
// fd_eps / ||g_i||, keeping the perturbation magnitude uniform.
// The stack is run without state updates (frozen spectral-norm vectors,
// no running-statistic changes); dropout_seed must match the step's main
// pass so the penalty sees the same network function.
GpResult gradient_penalty(LayerStack& stack, const RbfHead& head, const Tensor& inputs,
                          double lambda, bool with_param_grads, double fd_eps = 1e-3,
                          std::optional<std::uint64_t> dropout_seed = std::nullopt);

}  // namespace rbfood
