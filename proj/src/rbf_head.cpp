#include "rbfood/rbf_head.hpp"

#include <cmath>
#include <limits>

#include "rbfood/errors.hpp"
#include "rbfood/kernels.hpp"

namespace rbfood {

namespace {

int flatten_rows(const Tensor& features, int d, const char* who) {
    if (features.ndim() < 1 || features.shape.back() != d)
        throw ShapeError(std::string(who) + ": features have last dimension " +
                         std::to_string(features.empty() ? 0 : features.shape.back()) +
                         ", head expects " + std::to_string(d));
    return static_cast<int>(features.numel()) / d;
}

}  // namespace

RbfHead init_head(int num_classes, int num_centers, int feature_dim, double sigma, Rng& rng) {
    if (num_classes <= 0 || num_centers <= 0 || feature_dim <= 0)
        throw ValueError("init_head: dimensions must be positive");
    if (sigma <= 0.0) throw ValueError("init_head: sigma must be positive");
    RbfHead head;
    head.num_classes = num_classes;
    head.num_centers = num_centers;
    head.feature_dim = feature_dim;
    head.sigma = sigma;
    head.centers = randn_tensor({num_classes, num_centers, feature_dim}, rng, 0.05);
    head.weight_logits = Tensor::zeros({num_classes, num_centers});
    return head;
}

Tensor head_weights(const RbfHead& head) {
    const int c = head.num_classes, k = head.num_centers;
    Tensor w = head.weight_logits;
    for (int cc = 0; cc < c; ++cc) {
        double* row = w.data.data() + static_cast<long>(cc) * k;
        double m = row[0];
        for (int kk = 1; kk < k; ++kk) m = std::max(m, row[kk]);
        double sum = 0.0;
        for (int kk = 0; kk < k; ++kk) {
            row[kk] = std::exp(row[kk] - m);
            sum += row[kk];
        }
        for (int kk = 0; kk < k; ++kk) row[kk] /= sum;
    }
    return w;
}

RbfBatch rbf_scores_batch(const RbfHead& head, const Tensor& features) {
    const int d = head.feature_dim, c = head.num_classes, k = head.num_centers;
    const int n = flatten_rows(features, d, "rbf_scores_batch");
    RbfBatch out;
    out.weights = head_weights(head);
    out.h = Tensor({n, c}, std::vector<double>(static_cast<std::size_t>(n) * c));
    out.e = Tensor({n, c, k}, std::vector<double>(static_cast<std::size_t>(n) * c * k));
    const double inv_two_sigma_sq = 1.0 / (2.0 * head.sigma * head.sigma);
    kern::rbf_forward(features.ptr(), n, d, head.centers.ptr(), out.weights.ptr(), c, k,
                      inv_two_sigma_sq, out.h.data.data(), out.e.data.data());
    return out;
}

int argmax_lowest(const double* v, int n) {
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

double tau_from_scores(const double* h, int n) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) m = std::max(m, h[i]);
    return 1.0 - m;
}

ScoreVector rbf_scores(const RbfHead& head, const Tensor& feature) {
    if (static_cast<int>(feature.numel()) != head.feature_dim)
        throw ShapeError("rbf_scores: feature has " + std::to_string(feature.numel()) +
                         " values, head expects " + std::to_string(head.feature_dim));
    Tensor row({1, head.feature_dim}, feature.data);
    RbfBatch b = rbf_scores_batch(head, row);
    ScoreVector out;
    out.h = b.h.data;
    out.predicted_class = argmax_lowest(out.h.data(), head.num_classes);
    out.tau = tau_from_scores(out.h.data(), head.num_classes);
    return out;
}

RbfGrads rbf_scores_grad(const RbfHead& head, const Tensor& features, const RbfBatch& batch,
                         const Tensor& upstream, bool want_dfeat, bool want_dcenters,
                         bool want_dlogits) {
    const int d = head.feature_dim, c = head.num_classes, k = head.num_centers;
    const int n = flatten_rows(features, d, "rbf_scores_grad");
    if (static_cast<int>(upstream.numel()) != n * c)
        throw ShapeError("rbf_scores_grad: upstream has " + std::to_string(upstream.numel()) +
                         " values, expected " + std::to_string(static_cast<long>(n) * c));
    RbfGrads g;
    Tensor dweights;  // w.r.t. the normalized weights
    if (want_dfeat) g.dfeat = Tensor::zeros(features.shape);
    if (want_dcenters) g.dcenters = Tensor::zeros(head.centers.shape);
    if (want_dlogits) dweights = Tensor::zeros({c, k});
    const double inv_two_sigma_sq = 1.0 / (2.0 * head.sigma * head.sigma);
    kern::rbf_backward(features.ptr(), n, d, head.centers.ptr(), batch.weights.ptr(), c, k,
                       inv_two_sigma_sq, batch.e.ptr(), upstream.ptr(),
                       want_dfeat ? g.dfeat.data.data() : nullptr,
                       want_dcenters ? g.dcenters.data.data() : nullptr,
                       want_dlogits ? dweights.data.data() : nullptr);
    if (want_dlogits) {
        // Softmax chain per class row: dlogit_k = w_k * (dw_k - sum_j w_j dw_j).
        g.dlogits = Tensor::zeros({c, k});
        for (int cc = 0; cc < c; ++cc) {
            const double* w = batch.weights.ptr() + static_cast<long>(cc) * k;
            const double* dw = dweights.ptr() + static_cast<long>(cc) * k;
            double dot = 0.0;
            for (int kk = 0; kk < k; ++kk) dot += w[kk] * dw[kk];
            double* dl = g.dlogits.data.data() + static_cast<long>(cc) * k;
            for (int kk = 0; kk < k; ++kk) dl[kk] = w[kk] * (dw[kk] - dot);
        }
    }
    return g;
}

void ema_update_centers(RbfHead& head, const Tensor& batch_features,
                        const std::vector<int>& batch_labels, double momentum) {
    const int d = head.feature_dim, c = head.num_classes, k = head.num_centers;
    const int n = flatten_rows(batch_features, d, "ema_update_centers");
    if (static_cast<int>(batch_labels.size()) != n)
        throw ShapeError("ema_update_centers: " + std::to_string(batch_labels.size()) +
                         " labels for " + std::to_string(n) + " features");
    if (momentum < 0.0 || momentum > 1.0)
        throw ValueError("ema_update_centers: momentum must be in [0,1]");
    std::vector<double> sums(static_cast<std::size_t>(c) * k * d, 0.0);
    std::vector<long> counts(static_cast<std::size_t>(c) * k, 0);
    for (int i = 0; i < n; ++i) {
        const int label = batch_labels[i];
        if (label < 0 || label >= c)
            throw ValueError("ema_update_centers: label " + std::to_string(label) +
                             " outside [0," + std::to_string(c) + ")");
        const double* f = batch_features.ptr() + static_cast<long>(i) * d;
        int best = 0;
        double best_dist = std::numeric_limits<double>::infinity();
        for (int kk = 0; kk < k; ++kk) {
            const double* mu = head.centers.ptr() + ((static_cast<long>(label) * k + kk) * d);
            double dist = 0.0;
            for (int j = 0; j < d; ++j) {
                const double diff = f[j] - mu[j];
                dist += diff * diff;
            }
            if (dist < best_dist) {
                best_dist = dist;
                best = kk;
            }
        }
        const long slot = static_cast<long>(label) * k + best;
        counts[slot] += 1;
        double* s = sums.data() + slot * d;
        for (int j = 0; j < d; ++j) s[j] += f[j];
    }
    for (long slot = 0; slot < static_cast<long>(c) * k; ++slot) {
        if (counts[slot] == 0) continue;
        double* mu = head.centers.data.data() + slot * d;
        const double* s = sums.data() + slot * d;
        for (int j = 0; j < d; ++j)
            mu[j] = momentum * mu[j] + (1.0 - momentum) * (s[j] / counts[slot]);
    }
}

}  // namespace rbfood
