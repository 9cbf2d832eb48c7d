#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbfood/config.hpp"
#include "rbfood/layers.hpp"
#include "rbfood/rbf_head.hpp"
#include "rbfood/tensor.hpp"

namespace rbfood {

// Two-dimensional collapse demonstration: two labeled Gaussian blobs, uniform
// out-of-distribution points, and six model variants whose uncertainty fields
// are compared on a grid.

enum class ToyVariant { kPlain, kBn, kGp, kBnGp, kSpectral, kBoundary };

ToyVariant parse_toy_variant(const std::string& name);  // ConfigError on unknown name
const char* toy_variant_name(ToyVariant variant);
const std::vector<ToyVariant>& all_toy_variants();

struct ToyParams {
    double bg_mean_x = -2.0, bg_mean_y = 0.0;
    double obj_mean_x = 2.0, obj_mean_y = 0.0;
    double cov_scale = 0.3;  // isotropic covariance cov_scale * I
    int n_per_class = 500;
    int n_ood = 1000;
    double ood_halfwidth = 6.0;  // points drawn uniformly in [-hw, hw]^2
};

ToyParams toy_params_from(const Config& config);

struct ToyDataset {
    Tensor in_points;            // (N, 2); background rows first, then object
    std::vector<int> in_labels;  // 0 = background, 1 = object
    Tensor ood_points;           // (M, 2)
    ToyParams params;
};

// Deterministic in (params, seed). Counts must be >= 0 and cov_scale > 0.
ToyDataset generate_toy_data(const ToyParams& params, std::uint64_t seed);

// Midpoints of randomly paired background/object points, each perturbed by
// isotropic Gaussian noise of scale `jitter`. Both classes must be present.
Tensor sample_boundary_points(const Tensor& in_points, const std::vector<int>& in_labels,
                              int count, double jitter, std::uint64_t seed);

struct ToyModel {
    ToyVariant variant = ToyVariant::kPlain;
    LayerStack stack;  // 2 -> hidden -> hidden -> feature_dim MLP
    RbfHead head;      // C = 2
};

struct ToyEpochLog {
    int epoch = 0;
    double l_in = 0.0, l_bd = 0.0, l_reg = 0.0, total = 0.0;
    double train_acc = 0.0;
};

struct ToyTrainResult {
    ToyModel model;
    std::vector<ToyEpochLog> log;
};

// Builds the variant's stack and head and trains on the labeled points only;
// out-of-distribution points never reach this function. The boundary variant
// draws its own boundary points from (in_points, in_labels). Throws
// TrainingDiverged when a loss stops being finite.
ToyTrainResult train_toy_variant(const Tensor& in_points, const std::vector<int>& in_labels,
                                 ToyVariant variant, const Config& config, std::uint64_t seed);

// tau of each row of `points` (N, 2) under the trained model, eval mode.
std::vector<double> toy_taus(const ToyModel& model, const Tensor& points);

// Fraction of rows predicted as their label, eval mode.
double toy_accuracy(const ToyModel& model, const Tensor& points, const std::vector<int>& labels);

// tau over an inclusive [x_lo,x_hi] x [y_lo,y_hi] grid with `resolution`
// nodes per axis (>= 2), row-major with y down the rows.
Tensor uncertainty_grid(const ToyModel& model, double x_lo, double x_hi, double y_lo, double y_hi,
                        int resolution);

// 1 = in-distribution (tau < theta), 0 = out. theta must lie in [0, 1].
std::vector<int> classify_by_threshold(const std::vector<double>& taus, double theta);

struct ToySummary {
    double train_acc = 0.0;
    double ood_low_tau_frac = 0.0;  // fraction of OOD points with tau < theta
    double auroc_in_vs_ood = 0.0;   // tau as the OOD score
    double mean_tau_in = 0.0;
    double mean_tau_ood = 0.0;
};

ToySummary summarize_toy(const ToyModel& model, const ToyDataset& data, double theta);

}  // namespace rbfood
