#pragma once

#include <vector>

#include "rbfood/rng.hpp"
#include "rbfood/tensor.hpp"

namespace rbfood {

// Kernel classification head. Scores a feature against K learned centers per
// class: h_c = sum_k w_ck * exp(-||f - mu_ck||^2 / (2 sigma^2)), with the
// per-class weights parameterized as a softmax over logits so that each class
// row sums to 1, which bounds h_c in (0,1].
struct RbfHead {
    int num_classes = 0;   // C
    int num_centers = 0;   // K per class
    int feature_dim = 0;   // D
    double sigma = 0.1;
    Tensor centers;        // (C,K,D)
    Tensor weight_logits;  // (C,K)
};

// Centers drawn from N(0,1) scaled by 0.05; logits zero (uniform weights).
RbfHead init_head(int num_classes, int num_centers, int feature_dim, double sigma, Rng& rng);

// Per-class softmax of weight_logits, shape (C,K).
Tensor head_weights(const RbfHead& head);

struct ScoreVector {
    std::vector<double> h;
    int predicted_class = 0;  // argmax, ties to the lowest index
    double tau = 0.0;         // 1 - max_c h_c
};

// Batched scores with the kernel cache the backward pass needs.
struct RbfBatch {
    Tensor h;        // (N,C)
    Tensor e;        // (N,C,K) kernel values
    Tensor weights;  // (C,K) normalized weights used
};

// `features` is (N,D) or any (...,D); leading axes are flattened to rows.
RbfBatch rbf_scores_batch(const RbfHead& head, const Tensor& features);

ScoreVector rbf_scores(const RbfHead& head, const Tensor& feature);  // single D-vector

int argmax_lowest(const double* v, int n);
double tau_from_scores(const double* h, int n);  // 1 - max

struct RbfGrads {
    Tensor dfeat;     // same shape as features
    Tensor dcenters;  // (C,K,D)
    Tensor dlogits;   // (C,K), through the softmax parameterization
};

// Exact gradients for upstream d/dh of shape (N,C) (leading axes flattened
// like the forward). Unwanted outputs are skipped when the flag is false.
RbfGrads rbf_scores_grad(const RbfHead& head, const Tensor& features, const RbfBatch& batch,
                         const Tensor& upstream, bool want_dfeat = true,
                         bool want_dcenters = false, bool want_dlogits = true);

// Assigns each sample to the nearest center within its labeled class (ties to
// the lowest center index) and moves every center with at least one
// assignment toward the mean of its assigned features:
// mu <- momentum*mu + (1-momentum)*mean.
void ema_update_centers(RbfHead& head, const Tensor& batch_features,
                        const std::vector<int>& batch_labels, double momentum);

}  // namespace rbfood
