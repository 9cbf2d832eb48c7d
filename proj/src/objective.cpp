#include "rbfood/objective.hpp"

#include <cmath>

#include "rbfood/errors.hpp"

namespace rbfood {

namespace {

constexpr double kLogClamp = 1e-7;

}  // namespace

LossBreakdown total_loss(double l_in, double l_bd, double l_reg) {
    if (!std::isfinite(l_in) || !std::isfinite(l_bd) || !std::isfinite(l_reg))
        throw ValueError("total_loss: non-finite component");
    return LossBreakdown{l_in, l_bd, l_reg, l_in + l_bd + l_reg};
}

double score_bce(const Tensor& h, const Tensor& y, Tensor* dh) {
    if (!h.same_shape(y))
        throw ShapeError("score_bce: score shape " + h.shape_str() + " vs target shape " +
                         y.shape_str());
    if (dh) *dh = Tensor::zeros(h.shape);
    if (h.empty()) return 0.0;
    const long rows = h.shape[0];
    double loss = 0.0;
    for (long i = 0; i < h.numel(); ++i) {
        const double hv = h.data[i];
        const double yv = y.data[i];
        // -[y log h + (1-y) log(1-h)], each log argument clamped below.
        if (yv != 0.0) {
            if (hv > kLogClamp) {
                loss -= yv * std::log(hv);
                if (dh) dh->data[i] -= yv / hv;
            } else {
                loss -= yv * std::log(kLogClamp);
            }
        }
        if (yv != 1.0) {
            const double q = 1.0 - hv;
            if (q > kLogClamp) {
                loss -= (1.0 - yv) * std::log(q);
                if (dh) dh->data[i] += (1.0 - yv) / q;
            } else {
                loss -= (1.0 - yv) * std::log(kLogClamp);
            }
        }
    }
    loss /= static_cast<double>(rows);
    if (dh)
        for (double& g : dh->data) g /= static_cast<double>(rows);
    return loss;
}

double in_dist_loss(const Tensor& h, const Tensor& y_one_hot, Tensor* dh) {
    return score_bce(h, y_one_hot, dh);
}

double boundary_loss(const Tensor& h_boundary, Tensor* dh) {
    if (h_boundary.empty()) {
        if (dh) *dh = Tensor::zeros(h_boundary.shape.empty() ? std::vector<int>{0}
                                                             : h_boundary.shape);
        return 0.0;
    }
    return score_bce(h_boundary, Tensor::zeros(h_boundary.shape), dh);
}

GpResult gradient_penalty(LayerStack& stack, const RbfHead& head, const Tensor& inputs,
                          double lambda, bool with_param_grads, double fd_eps,
                          std::optional<std::uint64_t> dropout_seed) {
    if (lambda < 0.0) throw ValueError("gradient_penalty: lambda must be nonnegative");
    if (fd_eps <= 0.0) throw ValueError("gradient_penalty: fd_eps must be positive");
    if (inputs.empty()) throw ShapeError("gradient_penalty: empty input batch");
    const int m = inputs.shape[0];
    const long per_sample = inputs.numel() / m;

    // g_i = grad_x of S = sum over the sample's score entries.
    StackCache cache;
    Tensor feats = forward_stack(stack, inputs, dropout_seed, &cache, /*update_state=*/false);
    RbfBatch scores = rbf_scores_batch(head, feats);
    Tensor ones(scores.h.shape, std::vector<double>(scores.h.numel(), 1.0));
    RbfGrads head_g = rbf_scores_grad(head, feats, scores, ones, /*want_dfeat=*/true,
                                      /*want_dcenters=*/false, /*want_dlogits=*/false);
    BackwardResult back = backward_stack(stack, cache, head_g.dfeat);

    GpResult out;
    out.grad_norm_sq.resize(m);
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const double* g = back.input_grad.ptr() + static_cast<long>(i) * per_sample;
        double n = 0.0;
        for (long j = 0; j < per_sample; ++j) n += g[j] * g[j];
        out.grad_norm_sq[static_cast<std::size_t>(i)] = n;
        const double dev = n - 1.0;
        acc += dev * dev;
    }
    out.penalty = lambda * acc / m;
    if (!with_param_grads) return out;

    // Two perturbed passes; per-sample upstream weights fold the chain
    // lambda * (2/m) * (n_i - 1) / eps_i into the score gradient.
    const long rows_total = scores.h.shape[0];
    const long rows_per_sample = rows_total / m;
    std::vector<double> eps(m), coef(m);
    for (int i = 0; i < m; ++i) {
        const double norm = std::sqrt(out.grad_norm_sq[static_cast<std::size_t>(i)]);
        eps[static_cast<std::size_t>(i)] = fd_eps / std::max(norm, 1e-12);
        coef[static_cast<std::size_t>(i)] = lambda * (2.0 / m) *
                                            (out.grad_norm_sq[static_cast<std::size_t>(i)] - 1.0) /
                                            eps[static_cast<std::size_t>(i)];
    }
    for (int sign = 0; sign < 2; ++sign) {
        const double dir = sign == 0 ? 1.0 : -1.0;
        Tensor shifted = inputs;
        for (int i = 0; i < m; ++i) {
            const double e = dir * eps[static_cast<std::size_t>(i)];
            double* x = shifted.data.data() + static_cast<long>(i) * per_sample;
            const double* g = back.input_grad.ptr() + static_cast<long>(i) * per_sample;
            for (long j = 0; j < per_sample; ++j) x[j] += e * g[j];
        }
        StackCache pcache;
        Tensor pfeats =
            forward_stack(stack, shifted, dropout_seed, &pcache, /*update_state=*/false);
        RbfBatch pscores = rbf_scores_batch(head, pfeats);
        Tensor upstream(pscores.h.shape, std::vector<double>(pscores.h.numel()));
        const int c = head.num_classes;
        for (long r = 0; r < rows_total; ++r) {
            const double wgt = dir * coef[static_cast<std::size_t>(r / rows_per_sample)];
            for (int cc = 0; cc < c; ++cc) upstream.data[r * c + cc] = wgt;
        }
        RbfGrads pg = rbf_scores_grad(head, pfeats, pscores, upstream, /*want_dfeat=*/true,
                                      /*want_dcenters=*/false, /*want_dlogits=*/true);
        BackwardResult pback = backward_stack(stack, pcache, pg.dfeat);
        if (sign == 0) {
            out.stack_grads = std::move(pback.grads);
            out.dlogits = std::move(pg.dlogits);
        } else {
            out.stack_grads.accumulate(pback.grads);
            for (std::size_t j = 0; j < out.dlogits.data.size(); ++j)
                out.dlogits.data[j] += pg.dlogits.data[j];
        }
    }
    return out;
}

}  // namespace rbfood
