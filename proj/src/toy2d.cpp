#include "rbfood/toy2d.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "rbfood/errors.hpp"
#include "rbfood/metrics.hpp"
#include "rbfood/objective.hpp"
#include "rbfood/optim.hpp"
#include "rbfood/rng.hpp"

namespace rbfood {

namespace {

bool needs_batchnorm(ToyVariant v) { return v == ToyVariant::kBn || v == ToyVariant::kBnGp; }
bool needs_gp(ToyVariant v) { return v == ToyVariant::kGp || v == ToyVariant::kBnGp; }

ToyModel build_toy_model(ToyVariant variant, const Config& config, Rng& rng) {
    const int hidden = config.integer("toy.hidden");
    const int feature_dim = config.integer("toy.feature_dim");
    const bool sn = variant == ToyVariant::kSpectral;
    ToyModel model;
    model.variant = variant;
    model.stack.layers.push_back(dense_layer(2, hidden, rng, 1.0, sn));
    if (needs_batchnorm(variant)) model.stack.layers.push_back(batchnorm_layer(hidden));
    model.stack.layers.push_back(relu_layer());
    model.stack.layers.push_back(dense_layer(hidden, hidden, rng, 1.0, sn));
    if (needs_batchnorm(variant)) model.stack.layers.push_back(batchnorm_layer(hidden));
    model.stack.layers.push_back(relu_layer());
    model.stack.layers.push_back(dense_layer(hidden, feature_dim, rng, 1.0, sn));
    model.head = init_head(2, config.integer("toy.centers"), feature_dim,
                           config.num("toy.sigma"), rng);
    return model;
}

Tensor rows_at(const Tensor& points, const std::vector<int>& idx, int lo, int hi) {
    Tensor out = Tensor::zeros({hi - lo, 2});
    for (int r = lo; r < hi; ++r) {
        out.data[static_cast<std::size_t>(r - lo) * 2 + 0] =
            points.data[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]) * 2 + 0];
        out.data[static_cast<std::size_t>(r - lo) * 2 + 1] =
            points.data[static_cast<std::size_t>(idx[static_cast<std::size_t>(r)]) * 2 + 1];
    }
    return out;
}

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
    for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
        std::swap(idx[static_cast<std::size_t>(i)],
                  idx[static_cast<std::size_t>(rng.uniform_int(0, i))]);
}

}  // namespace

ToyVariant parse_toy_variant(const std::string& name) {
    if (name == "plain") return ToyVariant::kPlain;
    if (name == "bn") return ToyVariant::kBn;
    if (name == "gp") return ToyVariant::kGp;
    if (name == "bn+gp") return ToyVariant::kBnGp;
    if (name == "spectral") return ToyVariant::kSpectral;
    if (name == "boundary") return ToyVariant::kBoundary;
    throw ConfigError("unknown toy variant '" + name +
                      "' (expected plain, bn, gp, bn+gp, spectral, or boundary)");
}

const char* toy_variant_name(ToyVariant variant) {
    switch (variant) {
        case ToyVariant::kPlain: return "plain";
        case ToyVariant::kBn: return "bn";
        case ToyVariant::kGp: return "gp";
        case ToyVariant::kBnGp: return "bn+gp";
        case ToyVariant::kSpectral: return "spectral";
        case ToyVariant::kBoundary: return "boundary";
    }
    throw ValueError("invalid toy variant");
}

const std::vector<ToyVariant>& all_toy_variants() {
    static const std::vector<ToyVariant> variants = {ToyVariant::kPlain,    ToyVariant::kBn,
                                                     ToyVariant::kGp,       ToyVariant::kBnGp,
                                                     ToyVariant::kSpectral, ToyVariant::kBoundary};
    return variants;
}

ToyParams toy_params_from(const Config& config) {
    ToyParams p;
    p.bg_mean_x = config.num("toy.bg_mean_x");
    p.bg_mean_y = config.num("toy.bg_mean_y");
    p.obj_mean_x = config.num("toy.obj_mean_x");
    p.obj_mean_y = config.num("toy.obj_mean_y");
    p.cov_scale = config.num("toy.cov_scale");
    p.n_per_class = config.integer("toy.n_per_class");
    p.n_ood = config.integer("toy.n_ood");
    p.ood_halfwidth = config.num("toy.ood_halfwidth");
    return p;
}

ToyDataset generate_toy_data(const ToyParams& params, std::uint64_t seed) {
    if (params.n_per_class < 0 || params.n_ood < 0)
        throw ValueError("point counts must be >= 0");
    if (!(params.cov_scale > 0.0))
        throw ValueError("blob covariance scale must be positive, got " +
                         std::to_string(params.cov_scale));
    if (!(params.ood_halfwidth > 0.0))
        throw ValueError("OOD box half-width must be positive");
    Rng rng(seed);
    const double stddev = std::sqrt(params.cov_scale);
    ToyDataset data;
    data.params = params;
    const int n = params.n_per_class;
    data.in_points = Tensor::zeros({2 * n, 2});
    data.in_labels.assign(static_cast<std::size_t>(2 * n), 0);
    for (int i = 0; i < n; ++i) {
        data.in_points.data[static_cast<std::size_t>(i) * 2 + 0] =
            params.bg_mean_x + stddev * rng.normal();
        data.in_points.data[static_cast<std::size_t>(i) * 2 + 1] =
            params.bg_mean_y + stddev * rng.normal();
    }
    for (int i = 0; i < n; ++i) {
        data.in_points.data[static_cast<std::size_t>(n + i) * 2 + 0] =
            params.obj_mean_x + stddev * rng.normal();
        data.in_points.data[static_cast<std::size_t>(n + i) * 2 + 1] =
            params.obj_mean_y + stddev * rng.normal();
        data.in_labels[static_cast<std::size_t>(n + i)] = 1;
    }
    data.ood_points = Tensor::zeros({params.n_ood, 2});
    for (int i = 0; i < params.n_ood; ++i) {
        data.ood_points.data[static_cast<std::size_t>(i) * 2 + 0] =
            rng.uniform(-params.ood_halfwidth, params.ood_halfwidth);
        data.ood_points.data[static_cast<std::size_t>(i) * 2 + 1] =
            rng.uniform(-params.ood_halfwidth, params.ood_halfwidth);
    }
    return data;
}

Tensor sample_boundary_points(const Tensor& in_points, const std::vector<int>& in_labels,
                              int count, double jitter, std::uint64_t seed) {
    if (in_points.shape.size() != 2 || in_points.shape[1] != 2)
        throw ShapeError("points must be (N,2), got " + in_points.shape_str());
    if (static_cast<std::size_t>(in_points.shape[0]) != in_labels.size())
        throw ShapeError("label count does not match point count");
    if (count < 0) throw ValueError("boundary point count must be >= 0");
    std::vector<int> bg, obj;
    for (std::size_t i = 0; i < in_labels.size(); ++i)
        (in_labels[i] == 0 ? bg : obj).push_back(static_cast<int>(i));
    if (bg.empty() || obj.empty())
        throw ValueError("boundary points need both classes present");
    Rng rng(seed);
    Tensor out = Tensor::zeros({count, 2});
    for (int k = 0; k < count; ++k) {
        const int a = bg[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(bg.size()) - 1))];
        const int b =
            obj[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(obj.size()) - 1))];
        for (int d = 0; d < 2; ++d) {
            const double mid = 0.5 * (in_points.data[static_cast<std::size_t>(a) * 2 + d] +
                                      in_points.data[static_cast<std::size_t>(b) * 2 + d]);
            out.data[static_cast<std::size_t>(k) * 2 + d] = mid + jitter * rng.normal();
        }
    }
    return out;
}

ToyTrainResult train_toy_variant(const Tensor& in_points, const std::vector<int>& in_labels,
                                 ToyVariant variant, const Config& config, std::uint64_t seed) {
    if (in_points.shape.size() != 2 || in_points.shape[1] != 2)
        throw ShapeError("points must be (N,2), got " + in_points.shape_str());
    if (static_cast<std::size_t>(in_points.shape[0]) != in_labels.size())
        throw ShapeError("label count does not match point count");
    const int n = in_points.shape[0];
    const int epochs = config.integer("toy.epochs");
    const int batch_size = std::max(1, config.integer("train.batch"));
    const double ema = config.num("toy.ema");

    Rng init_rng(mix_seed(seed, 1));
    ToyTrainResult result;
    result.model = build_toy_model(variant, config, init_rng);
    ToyModel& model = result.model;
    model.stack.mode = Mode::Train;

    const std::uint64_t boundary_seed = mix_seed(seed, 2);
    std::uint64_t step = 0;

    SgdOptimizer sgd({config.num("toy.lr"), config.num("train.momentum"),
                      config.num("train.lr_decay_factor"), config.integer("train.lr_decay_period")});
    Rng shuffle_rng(mix_seed(seed, 3));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        double sum_in = 0.0, sum_bd = 0.0, sum_reg = 0.0;
        int correct = 0, batches = 0;
        for (int lo = 0; lo < n; lo += batch_size, ++batches) {
            const int hi = std::min(n, lo + batch_size);
            const int b = hi - lo;
            const Tensor x = rows_at(in_points, order, lo, hi);
            std::vector<int> labels(static_cast<std::size_t>(b));
            for (int r = 0; r < b; ++r)
                labels[static_cast<std::size_t>(r)] =
                    in_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(lo + r)])];

            StackCache cache;
            const Tensor feats = forward_stack(model.stack, x, std::nullopt, &cache, true);
            const RbfBatch scores = rbf_scores_batch(model.head, feats);
            Tensor y = Tensor::zeros({b, 2});
            for (int r = 0; r < b; ++r) {
                y.data[static_cast<std::size_t>(r) * 2 + labels[static_cast<std::size_t>(r)]] = 1.0;
                const double h0 = scores.h.data[static_cast<std::size_t>(r) * 2 + 0];
                const double h1 = scores.h.data[static_cast<std::size_t>(r) * 2 + 1];
                correct += (h1 > h0 ? 1 : 0) == labels[static_cast<std::size_t>(r)];
            }
            Tensor dh;
            const double l_in = in_dist_loss(scores.h, y, &dh);
            RbfGrads hg = rbf_scores_grad(model.head, feats, scores, dh, true, false, true);
            BackwardResult back = backward_stack(model.stack, cache, hg.dfeat);
            StackGrads grads = std::move(back.grads);
            Tensor dlogits = std::move(hg.dlogits);

            double l_bd = 0.0;
            const int boundary_count = config.integer("toy.boundary_count");
            if (variant == ToyVariant::kBoundary && boundary_count > 0) {
                const Tensor boundary =
                    sample_boundary_points(in_points, in_labels, boundary_count,
                                           config.num("toy.boundary_jitter"),
                                           mix_seed(boundary_seed, step));
                StackCache bd_cache;
                const Tensor bd_feats =
                    forward_stack(model.stack, boundary, std::nullopt, &bd_cache, false);
                const RbfBatch bd_scores = rbf_scores_batch(model.head, bd_feats);
                Tensor dhb;
                l_bd = boundary_loss(bd_scores.h, &dhb);
                RbfGrads bg = rbf_scores_grad(model.head, bd_feats, bd_scores, dhb, true, false, true);
                BackwardResult bd_back = backward_stack(model.stack, bd_cache, bg.dfeat);
                grads.accumulate(bd_back.grads);
                for (std::size_t j = 0; j < dlogits.data.size(); ++j)
                    dlogits.data[j] += bg.dlogits.data[j];
            }

            double l_reg = 0.0;
            if (needs_gp(variant)) {
                GpResult gp = gradient_penalty(model.stack, model.head, x,
                                               config.num("train.lambda_gp"), true,
                                               config.num("train.gp_fd_eps"));
                l_reg = gp.penalty;
                grads.accumulate(gp.stack_grads);
                for (std::size_t j = 0; j < dlogits.data.size(); ++j)
                    dlogits.data[j] += gp.dlogits.data[j];
            }

            if (!std::isfinite(l_in) || !std::isfinite(l_bd) || !std::isfinite(l_reg))
                throw TrainingDiverged("non-finite loss in toy variant " +
                                           std::string(toy_variant_name(variant)),
                                       epoch, batches);

            std::vector<Tensor*> params = trainable_params(model.stack);
            std::vector<const Tensor*> param_grads = flat_grads(model.stack, grads);
            params.push_back(&model.head.weight_logits);
            param_grads.push_back(&dlogits);
            sgd.step(params, param_grads, epoch);
            model.stack.version += 1;
            ema_update_centers(model.head, feats, labels, ema);
            step += 1;

            sum_in += l_in * b;
            sum_bd += l_bd;
            sum_reg += l_reg;
        }
        ToyEpochLog entry;
        entry.epoch = epoch;
        entry.l_in = sum_in / n;
        entry.l_bd = batches ? sum_bd / batches : 0.0;
        entry.l_reg = batches ? sum_reg / batches : 0.0;
        entry.total = entry.l_in + entry.l_bd + entry.l_reg;
        entry.train_acc = static_cast<double>(correct) / n;
        result.log.push_back(entry);
    }
    model.stack.mode = Mode::Eval;
    return result;
}

std::vector<double> toy_taus(const ToyModel& model, const Tensor& points) {
    if (points.shape.size() != 2 || points.shape[1] != 2)
        throw ShapeError("points must be (N,2), got " + points.shape_str());
    const Tensor feats = forward_eval(model.stack, points);
    const RbfBatch scores = rbf_scores_batch(model.head, feats);
    const int n = points.shape[0], c = scores.h.shape[1];
    std::vector<double> taus(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        taus[static_cast<std::size_t>(i)] =
            tau_from_scores(scores.h.data.data() + static_cast<std::size_t>(i) * c, c);
    return taus;
}

double toy_accuracy(const ToyModel& model, const Tensor& points, const std::vector<int>& labels) {
    const Tensor feats = forward_eval(model.stack, points);
    const RbfBatch scores = rbf_scores_batch(model.head, feats);
    const int n = points.shape[0], c = scores.h.shape[1];
    std::vector<int> predictions(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        predictions[static_cast<std::size_t>(i)] =
            argmax_lowest(scores.h.data.data() + static_cast<std::size_t>(i) * c, c);
    return accuracy(predictions, labels);
}

Tensor uncertainty_grid(const ToyModel& model, double x_lo, double x_hi, double y_lo, double y_hi,
                        int resolution) {
    if (resolution < 2)
        throw ValueError("grid resolution must be >= 2, got " + std::to_string(resolution));
    Tensor nodes = Tensor::zeros({resolution * resolution, 2});
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            nodes.data[(static_cast<std::size_t>(i) * resolution + j) * 2 + 0] =
                x_lo + (x_hi - x_lo) * j / (resolution - 1);
            nodes.data[(static_cast<std::size_t>(i) * resolution + j) * 2 + 1] =
                y_lo + (y_hi - y_lo) * i / (resolution - 1);
        }
    }
    const std::vector<double> taus = toy_taus(model, nodes);
    return Tensor({resolution, resolution}, std::vector<double>(taus.begin(), taus.end()));
}

std::vector<int> classify_by_threshold(const std::vector<double>& taus, double theta) {
    if (!(theta >= 0.0 && theta <= 1.0))
        throw ValueError("threshold must lie in [0,1], got " + std::to_string(theta));
    std::vector<int> in(taus.size());
    for (std::size_t i = 0; i < taus.size(); ++i) in[i] = taus[i] < theta ? 1 : 0;
    return in;
}

ToySummary summarize_toy(const ToyModel& model, const ToyDataset& data, double theta) {
    ToySummary s;
    s.train_acc = toy_accuracy(model, data.in_points, data.in_labels);
    const std::vector<double> tau_in = toy_taus(model, data.in_points);
    const std::vector<double> tau_ood = toy_taus(model, data.ood_points);
    double sum_in = 0.0, sum_ood = 0.0;
    std::vector<ScoredSample> samples;
    for (double t : tau_in) {
        sum_in += t;
        samples.push_back({t, false});
    }
    int low = 0;
    for (double t : tau_ood) {
        sum_ood += t;
        low += t < theta;
        samples.push_back({t, true});
    }
    s.mean_tau_in = tau_in.empty() ? 0.0 : sum_in / static_cast<double>(tau_in.size());
    s.mean_tau_ood = tau_ood.empty() ? 0.0 : sum_ood / static_cast<double>(tau_ood.size());
    s.ood_low_tau_frac = tau_ood.empty() ? 0.0 : static_cast<double>(low) / static_cast<double>(tau_ood.size());
    s.auroc_in_vs_ood = auroc(samples);
    return s;
}

}  // namespace rbfood
