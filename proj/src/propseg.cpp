#include "rbfood/propseg.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "rbfood/errors.hpp"
#include "rbfood/objective.hpp"
#include "rbfood/optim.hpp"
#include "rbfood/rng.hpp"

namespace rbfood {

namespace {

constexpr int kMapSide = 28;

void shuffle_indices(std::vector<int>& idx, Rng& rng) {
    for (int i = static_cast<int>(idx.size()) - 1; i > 0; --i)
        std::swap(idx[static_cast<std::size_t>(i)],
                  idx[static_cast<std::size_t>(rng.uniform_int(0, i))]);
}

// Softmax over the last axis of (M,C) logits, in place.
void softmax_rows(Tensor& t) {
    const int c = t.shape.back();
    const long rows = t.numel() / c;
    for (long r = 0; r < rows; ++r) {
        double* row = t.data.data() + r * c;
        double mx = row[0];
        for (int j = 1; j < c; ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (int j = 0; j < c; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        for (int j = 0; j < c; ++j) row[j] /= sum;
    }
}

double entropy_normalized(const double* probs, int c) {
    double h = 0.0;
    for (int j = 0; j < c; ++j)
        if (probs[j] > 0.0) h -= probs[j] * std::log(probs[j]);
    return h / std::log(static_cast<double>(c));
}

std::vector<int> class_index_map(const std::vector<int>& trained_classes) {
    std::vector<int> map(static_cast<std::size_t>(kNumClasses), -1);
    for (std::size_t i = 0; i < trained_classes.size(); ++i)
        map[static_cast<std::size_t>(trained_classes[i])] = static_cast<int>(i);
    return map;
}

void check_proposal_shapes(const PropSegModel& model, const Proposal& p) {
    const std::vector<int> want{14, 14, model.input_channels};
    if (p.features.shape != want)
        throw ShapeError("proposal features must be (14,14," +
                         std::to_string(model.input_channels) + "), got " +
                         p.features.shape_str());
    if (p.labels28.shape != std::vector<int>{kMapSide, kMapSide})
        throw ShapeError("proposal labels must be (28,28), got " + p.labels28.shape_str());
}

}  // namespace

SegHead parse_seg_head(const std::string& name) {
    if (name == "rbf") return SegHead::kRbf;
    if (name == "dropout") return SegHead::kDropout;
    if (name == "entropy") return SegHead::kEntropy;
    throw ConfigError("seg.head must be rbf, dropout, or entropy, got '" + name + "'");
}

const char* seg_head_name(SegHead head) {
    switch (head) {
        case SegHead::kRbf: return "rbf";
        case SegHead::kDropout: return "dropout";
        default: return "entropy";
    }
}

SegRegularizer parse_seg_regularizer(const std::string& name) {
    if (name == "none") return SegRegularizer::kNone;
    if (name == "gp") return SegRegularizer::kGp;
    if (name == "boundary") return SegRegularizer::kBoundary;
    throw ConfigError("seg.regularizer must be none, gp, or boundary, got '" + name + "'");
}

const char* seg_regularizer_name(SegRegularizer reg) {
    switch (reg) {
        case SegRegularizer::kNone: return "none";
        case SegRegularizer::kGp: return "gp";
        default: return "boundary";
    }
}

Tensor upsample2x_nearest(const Tensor& maps) {
    if (maps.shape.size() != 4)
        throw ShapeError("upsample2x_nearest wants (N,H,W,C), got " + maps.shape_str());
    const int n = maps.shape[0], h = maps.shape[1], w = maps.shape[2], c = maps.shape[3];
    Tensor out = Tensor::zeros({n, 2 * h, 2 * w, c});
    for (int b = 0; b < n; ++b)
        for (int i = 0; i < 2 * h; ++i)
            for (int j = 0; j < 2 * w; ++j) {
                const double* src =
                    maps.ptr() + ((static_cast<long>(b) * h + i / 2) * w + j / 2) * c;
                double* dst =
                    out.data.data() + ((static_cast<long>(b) * 2 * h + i) * 2 * w + j) * c;
                for (int k = 0; k < c; ++k) dst[k] = src[k];
            }
    return out;
}

PropSegModel build_propseg_model(const Config& config, std::uint64_t seed) {
    const SegHead head_kind = parse_seg_head(config.str("seg.head"));
    const SegRegularizer reg = parse_seg_regularizer(config.str("seg.regularizer"));
    if (reg != SegRegularizer::kNone && head_kind != SegHead::kRbf)
        throw ConfigError("seg.regularizer requires seg.head = rbf");
    const int conv_layers = config.integer("seg.conv_layers");
    if (conv_layers < 0 || conv_layers > 8)
        throw ConfigError("seg.conv_layers must be in [0,8]");
    const int conv_width = config.integer("seg.conv_width");
    const int feature_dim = config.integer("seg.feature_dim");
    if (conv_width < 1) throw ConfigError("seg.conv_width must be positive");
    if (feature_dim < 1) throw ConfigError("seg.feature_dim must be positive");
    const int centers = config.integer("seg.centers");
    if (centers < 1) throw ConfigError("seg.centers must be positive");
    const double dropout_p = config.num("seg.dropout_p");
    if (dropout_p < 0.0 || dropout_p >= 1.0) throw ConfigError("seg.dropout_p must be in [0,1)");
    const int passes = config.integer("seg.dropout_passes");
    if (passes < 1) throw ConfigError("seg.dropout_passes must be positive");

    PropSegModel model;
    model.head_kind = head_kind;
    model.input_channels =
        recipe_channels(parse_recipe(config.str("bench.feature_recipe")));
    if (config.flag("seg.bg_only"))
        model.trained_classes = {kClassGround, kClassSky, kClassWall};
    else
        model.trained_classes = {kClassGround, kClassSky,    kClassWall,
                                 kClassSquare, kClassCircle, kClassTriangle};
    model.dropout_passes = passes;

    Rng rng(seed);
    int head_dim = model.input_channels;
    if (conv_layers > 0) {
        int cin = model.input_channels;
        for (int i = 0; i < conv_layers; ++i) {
            model.stack.layers.push_back(conv3x3_layer(cin, conv_width, rng));
            model.stack.layers.push_back(relu_layer());
            cin = conv_width;
        }
        model.stack.layers.push_back(deconv2x_layer(conv_width, conv_width, rng));
        model.stack.layers.push_back(relu_layer());
        model.stack.layers.push_back(dense_layer(conv_width, feature_dim, rng));
        head_dim = feature_dim;
    }
    model.stack.mode = Mode::Eval;

    const int c = model.class_count();
    if (head_kind == SegHead::kRbf) {
        model.head = init_head(c, centers, head_dim, config.num("head.sigma"), rng);
    } else {
        if (head_kind == SegHead::kDropout)
            model.linear_head.layers.push_back(dropout_layer(dropout_p));
        model.linear_head.layers.push_back(dense_layer(head_dim, c, rng));
        model.linear_head.mode = Mode::Eval;
    }
    return model;
}

SegOutput segment_proposal(const PropSegModel& model, const Tensor& features,
                           std::uint64_t seed) {
    const std::vector<int> want{14, 14, model.input_channels};
    if (features.shape != want)
        throw ShapeError("segment_proposal wants (14,14," +
                         std::to_string(model.input_channels) + ") features, got " +
                         features.shape_str());
    Tensor x({1, 14, 14, model.input_channels}, features.data);
    Tensor feats = model.stack.layers.empty() ? upsample2x_nearest(x)
                                              : forward_eval(model.stack, x);

    const int c = model.class_count();
    const long pixels = kMapSide * kMapSide;
    SegOutput out;
    out.class_map = Tensor::zeros({kMapSide, kMapSide});
    out.u_seg = Tensor::zeros({kMapSide, kMapSide});

    Tensor probs;
    if (model.head_kind == SegHead::kRbf) {
        probs = rbf_scores_batch(model.head, feats).h;
    } else if (model.head_kind == SegHead::kEntropy) {
        probs = forward_eval(model.linear_head, feats);
        softmax_rows(probs);
    } else {
        LayerStack mc = model.linear_head;
        mc.mode = Mode::Train;
        probs = Tensor::zeros({1, kMapSide, kMapSide, c});
        for (int t = 0; t < model.dropout_passes; ++t) {
            Tensor pass = forward_stack(mc, feats, mix_seed(seed, static_cast<std::uint64_t>(t)),
                                        nullptr, /*update_state=*/false);
            softmax_rows(pass);
            for (std::size_t j = 0; j < probs.data.size(); ++j) probs.data[j] += pass.data[j];
        }
        for (double& v : probs.data) v /= model.dropout_passes;
    }

    out.h_maps = Tensor({kMapSide, kMapSide, c}, probs.data);
    for (long p = 0; p < pixels; ++p) {
        const double* row = probs.ptr() + p * c;
        const int best = argmax_lowest(row, c);
        out.class_map.data[static_cast<std::size_t>(p)] =
            model.trained_classes[static_cast<std::size_t>(best)];
        out.u_seg.data[static_cast<std::size_t>(p)] =
            model.head_kind == SegHead::kRbf ? tau_from_scores(row, c)
                                             : entropy_normalized(row, c);
    }
    return out;
}

Tensor binary_object_mask(const SegOutput& seg, const std::vector<int>& trained_classes,
                          double theta_bg) {
    if (theta_bg <= 0.0 || theta_bg >= 1.0)
        throw ValueError("binary_object_mask: theta_bg must be in (0,1)");
    const int c = static_cast<int>(trained_classes.size());
    if (seg.h_maps.shape != std::vector<int>{kMapSide, kMapSide, c})
        throw ShapeError("binary_object_mask: h_maps shape " + seg.h_maps.shape_str() +
                         " does not match " + std::to_string(c) + " classes");
    Tensor mask = Tensor::zeros({kMapSide, kMapSide});
    for (long p = 0; p < kMapSide * kMapSide; ++p) {
        const double* row = seg.h_maps.ptr() + p * c;
        double best_bg = 0.0;
        for (int j = 0; j < c; ++j)
            if (is_background_class(trained_classes[static_cast<std::size_t>(j)]))
                best_bg = std::max(best_bg, row[j]);
        const bool background = best_bg > 1.0 - theta_bg;
        mask.data[static_cast<std::size_t>(p)] = background ? 0.0 : 1.0;
    }
    return mask;
}

std::vector<SegEpochLog> train_propseg(PropSegModel& model,
                                       const std::vector<Proposal>& proposals,
                                       const Config& config, std::uint64_t seed) {
    if (proposals.empty()) throw ValueError("train_propseg: empty proposal set");
    for (const Proposal& p : proposals) {
        check_proposal_shapes(model, p);
        for (double v : p.labels28.data)
            if (v >= 0.0 && is_unknown_class(static_cast<int>(v)))
                throw ValueError("train_propseg: train split contains unknown-class pixels");
    }
    const SegRegularizer reg = parse_seg_regularizer(config.str("seg.regularizer"));
    const int epochs = config.integer("seg.epochs");
    const int batch_size = std::max(1, config.integer("train.batch"));
    const double ema = config.num("train.ema");
    const int n = static_cast<int>(proposals.size());
    const int c = model.class_count();
    const std::vector<int> cls_index = class_index_map(model.trained_classes);
    const bool rbf = model.head_kind == SegHead::kRbf;

    model.stack.mode = Mode::Train;
    model.linear_head.mode = Mode::Train;
    SgdOptimizer sgd({config.num("train.lr"), config.num("train.momentum"),
                      config.num("train.lr_decay_factor"), config.integer("train.lr_decay_period")});
    Rng shuffle_rng(mix_seed(seed, 3));
    const std::uint64_t dropout_base = mix_seed(seed, 4);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

    std::vector<SegEpochLog> log;
    std::uint64_t step = 0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        double sum_in = 0.0, sum_bd = 0.0, sum_reg = 0.0;
        long pixels_in = 0, correct = 0;
        int batches = 0;
        for (int lo = 0; lo < n; lo += batch_size, ++batches) {
            const int hi = std::min(n, lo + batch_size);
            const int b = hi - lo;
            Tensor x = Tensor::zeros({b, 14, 14, model.input_channels});
            Tensor labels = Tensor::zeros({b, kMapSide, kMapSide});
            for (int r = 0; r < b; ++r) {
                const Proposal& p =
                    proposals[static_cast<std::size_t>(order[static_cast<std::size_t>(lo + r)])];
                std::copy(p.features.data.begin(), p.features.data.end(),
                          x.data.begin() + static_cast<long>(r) * p.features.numel());
                std::copy(p.labels28.data.begin(), p.labels28.data.end(),
                          labels.data.begin() + static_cast<long>(r) * p.labels28.numel());
            }

            const bool no_conv = model.stack.layers.empty();
            const Tensor stack_in = no_conv ? upsample2x_nearest(x) : x;
            StackCache cache;
            const Tensor feats = no_conv
                                     ? stack_in
                                     : forward_stack(model.stack, stack_in, std::nullopt, &cache,
                                                     /*update_state=*/true);
            const long rows = feats.numel() / feats.shape.back();
            const int d = feats.shape.back();

            // Contributing pixel rows: in-distribution and (optionally) boundary.
            std::vector<long> in_rows, bd_rows;
            std::vector<int> in_cls;
            for (long r = 0; r < rows; ++r) {
                const double v = labels.data[static_cast<std::size_t>(r)];
                if (v == kBoundaryLabel) {
                    if (reg == SegRegularizer::kBoundary) bd_rows.push_back(r);
                    continue;
                }
                if (v < 0.0) continue;
                const int idx = cls_index[static_cast<std::size_t>(static_cast<int>(v))];
                if (idx < 0) continue;
                in_rows.push_back(r);
                in_cls.push_back(idx);
            }

            double l_in = 0.0, l_bd = 0.0, l_reg = 0.0;
            StackGrads grads;
            BackwardResult lin_back;
            Tensor dlogits_head;
            Tensor scores_h;
            const long m = static_cast<long>(in_rows.size());

            if (rbf) {
                const RbfBatch scores = rbf_scores_batch(model.head, feats);
                scores_h = scores.h;
                Tensor dh_total = Tensor::zeros(scores.h.shape);
                if (m > 0) {
                    Tensor h_sub = Tensor::zeros({static_cast<int>(m), c});
                    Tensor y = Tensor::zeros({static_cast<int>(m), c});
                    for (long i = 0; i < m; ++i) {
                        const long r = in_rows[static_cast<std::size_t>(i)];
                        std::copy(scores.h.ptr() + r * c, scores.h.ptr() + (r + 1) * c,
                                  h_sub.data.begin() + i * c);
                        y.data[static_cast<std::size_t>(i * c +
                                                        in_cls[static_cast<std::size_t>(i)])] = 1.0;
                    }
                    Tensor dh_sub;
                    l_in = in_dist_loss(h_sub, y, &dh_sub);
                    for (long i = 0; i < m; ++i) {
                        const long r = in_rows[static_cast<std::size_t>(i)];
                        std::copy(dh_sub.ptr() + i * c, dh_sub.ptr() + (i + 1) * c,
                                  dh_total.data.begin() + r * c);
                    }
                }
                if (!bd_rows.empty()) {
                    Tensor h_bd =
                        Tensor::zeros({static_cast<int>(bd_rows.size()), c});
                    for (std::size_t i = 0; i < bd_rows.size(); ++i)
                        std::copy(scores.h.ptr() + bd_rows[i] * c,
                                  scores.h.ptr() + (bd_rows[i] + 1) * c,
                                  h_bd.data.begin() + static_cast<long>(i) * c);
                    Tensor dh_bd;
                    l_bd = boundary_loss(h_bd, &dh_bd);
                    for (std::size_t i = 0; i < bd_rows.size(); ++i)
                        std::copy(dh_bd.ptr() + static_cast<long>(i) * c,
                                  dh_bd.ptr() + static_cast<long>(i + 1) * c,
                                  dh_total.data.begin() + bd_rows[i] * c);
                }
                RbfGrads hg = rbf_scores_grad(model.head, feats, scores, dh_total,
                                              /*want_dfeat=*/true, /*want_dcenters=*/false,
                                              /*want_dlogits=*/true);
                dlogits_head = std::move(hg.dlogits);
                if (!no_conv) {
                    BackwardResult back = backward_stack(model.stack, cache, hg.dfeat);
                    grads = std::move(back.grads);
                }
                if (reg == SegRegularizer::kGp) {
                    GpResult gp = gradient_penalty(model.stack, model.head, stack_in,
                                                   config.num("train.lambda_gp"),
                                                   /*with_param_grads=*/true,
                                                   config.num("train.gp_fd_eps"));
                    l_reg = gp.penalty;
                    if (!no_conv) grads.accumulate(gp.stack_grads);
                    for (std::size_t j = 0; j < dlogits_head.data.size(); ++j)
                        dlogits_head.data[j] += gp.dlogits.data[j];
                }
            } else {
                StackCache lcache;
                Tensor probs = forward_stack(model.linear_head, feats, mix_seed(dropout_base, step),
                                             &lcache, /*update_state=*/true);
                softmax_rows(probs);
                scores_h = probs;
                Tensor dlogits = Tensor::zeros(probs.shape);
                if (m > 0) {
                    for (long i = 0; i < m; ++i) {
                        const long r = in_rows[static_cast<std::size_t>(i)];
                        const int yi = in_cls[static_cast<std::size_t>(i)];
                        const double* p = probs.ptr() + r * c;
                        l_in -= std::log(std::max(p[yi], 1e-300));
                        double* g = dlogits.data.data() + r * c;
                        for (int j = 0; j < c; ++j)
                            g[j] = (p[j] - (j == yi ? 1.0 : 0.0)) / static_cast<double>(m);
                    }
                    l_in /= static_cast<double>(m);
                }
                lin_back = backward_stack(model.linear_head, lcache, dlogits);
                if (!no_conv) {
                    BackwardResult back = backward_stack(model.stack, cache, lin_back.input_grad);
                    grads = std::move(back.grads);
                }
            }

            for (long i = 0; i < m; ++i) {
                const long r = in_rows[static_cast<std::size_t>(i)];
                correct += argmax_lowest(scores_h.ptr() + r * c, c) ==
                           in_cls[static_cast<std::size_t>(i)];
            }

            if (!std::isfinite(l_in) || !std::isfinite(l_bd) || !std::isfinite(l_reg))
                throw TrainingDiverged("non-finite loss in segmentation training", epoch, batches);

            std::vector<Tensor*> params = trainable_params(model.stack);
            std::vector<const Tensor*> param_grads = flat_grads(model.stack, grads);
            if (rbf) {
                params.push_back(&model.head.weight_logits);
                param_grads.push_back(&dlogits_head);
            } else {
                std::vector<Tensor*> lp = trainable_params(model.linear_head);
                std::vector<const Tensor*> lg = flat_grads(model.linear_head, lin_back.grads);
                params.insert(params.end(), lp.begin(), lp.end());
                param_grads.insert(param_grads.end(), lg.begin(), lg.end());
            }
            sgd.step(params, param_grads, epoch);
            model.stack.version += 1;
            model.linear_head.version += 1;

            if (rbf && m > 0) {
                Tensor ema_feats = Tensor::zeros({static_cast<int>(m), d});
                for (long i = 0; i < m; ++i)
                    std::copy(feats.ptr() + in_rows[static_cast<std::size_t>(i)] * d,
                              feats.ptr() + (in_rows[static_cast<std::size_t>(i)] + 1) * d,
                              ema_feats.data.begin() + i * d);
                ema_update_centers(model.head, ema_feats, in_cls, ema);
            }

            sum_in += l_in * static_cast<double>(m);
            pixels_in += m;
            sum_bd += l_bd;
            sum_reg += l_reg;
            step += 1;
        }
        SegEpochLog entry;
        entry.epoch = epoch;
        entry.l_in = pixels_in > 0 ? sum_in / static_cast<double>(pixels_in) : 0.0;
        entry.l_bd = batches > 0 ? sum_bd / batches : 0.0;
        entry.l_reg = batches > 0 ? sum_reg / batches : 0.0;
        entry.pixel_acc =
            pixels_in > 0 ? static_cast<double>(correct) / static_cast<double>(pixels_in) : 0.0;
        log.push_back(entry);
    }
    model.stack.mode = Mode::Eval;
    model.linear_head.mode = Mode::Eval;
    return log;
}

namespace {

void put_stack(Checkpoint& ck, const std::string& prefix, const LayerStack& stack) {
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        const Layer& l = stack.layers[i];
        const std::string base = prefix + "." + std::to_string(i);
        if (!l.weight.empty()) ck.put_tensor(base + ".weight", l.weight);
        if (!l.bias.empty()) ck.put_tensor(base + ".bias", l.bias);
        if (!l.running_mean.empty()) ck.put_tensor(base + ".running_mean", l.running_mean);
        if (!l.running_var.empty()) ck.put_tensor(base + ".running_var", l.running_var);
        if (!l.sn_u.empty()) ck.put_tensor(base + ".sn_u", l.sn_u);
        if (!l.sn_v.empty()) ck.put_tensor(base + ".sn_v", l.sn_v);
    }
}

void take_tensor(const Checkpoint& ck, const std::string& name, Tensor& dst) {
    if (!ck.has_tensor(name)) throw IoError("checkpoint is missing tensor '" + name + "'");
    const Tensor& src = ck.tensor_at(name);
    if (src.shape != dst.shape)
        throw ShapeError("checkpoint tensor '" + name + "' has shape " + src.shape_str() +
                         ", expected " + dst.shape_str());
    dst = src;
}

void restore_stack(const Checkpoint& ck, const std::string& prefix, LayerStack& stack) {
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        Layer& l = stack.layers[i];
        const std::string base = prefix + "." + std::to_string(i);
        if (!l.weight.empty()) take_tensor(ck, base + ".weight", l.weight);
        if (!l.bias.empty()) take_tensor(ck, base + ".bias", l.bias);
        if (!l.running_mean.empty()) take_tensor(ck, base + ".running_mean", l.running_mean);
        if (!l.running_var.empty()) take_tensor(ck, base + ".running_var", l.running_var);
        if (!l.sn_u.empty()) take_tensor(ck, base + ".sn_u", l.sn_u);
        if (!l.sn_v.empty()) take_tensor(ck, base + ".sn_v", l.sn_v);
    }
}

std::string classes_csv(const std::vector<int>& classes) {
    std::string out;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(classes[i]);
    }
    return out;
}

}  // namespace

Checkpoint propseg_checkpoint(const PropSegModel& model) {
    Checkpoint ck;
    ck.put_meta("model", "propseg");
    ck.put_meta("head", seg_head_name(model.head_kind));
    ck.put_meta_int("input_channels", model.input_channels);
    ck.put_meta("classes", classes_csv(model.trained_classes));
    ck.put_meta_int("dropout_passes", model.dropout_passes);
    put_stack(ck, "stack", model.stack);
    if (model.head_kind == SegHead::kRbf) {
        ck.put_meta_num("sigma", model.head.sigma);
        ck.put_tensor("head.centers", model.head.centers);
        ck.put_tensor("head.weight_logits", model.head.weight_logits);
    } else {
        put_stack(ck, "linear", model.linear_head);
    }
    return ck;
}

void restore_propseg(PropSegModel& model, const Checkpoint& ck) {
    if (!ck.has_meta("model") || ck.meta_at("model") != "propseg")
        throw IoError("checkpoint is not a segmentation model");
    if (ck.meta_at("head") != seg_head_name(model.head_kind))
        throw IoError("checkpoint head '" + ck.meta_at("head") + "' does not match model '" +
                      seg_head_name(model.head_kind) + "'");
    if (ck.meta_int("input_channels") != model.input_channels)
        throw IoError("checkpoint input channels do not match the configured feature recipe");
    if (ck.meta_at("classes") != classes_csv(model.trained_classes))
        throw IoError("checkpoint class set does not match the configured policy");
    restore_stack(ck, "stack", model.stack);
    if (model.head_kind == SegHead::kRbf) {
        model.head.sigma = ck.meta_num("sigma");
        take_tensor(ck, "head.centers", model.head.centers);
        take_tensor(ck, "head.weight_logits", model.head.weight_logits);
    } else {
        model.dropout_passes = static_cast<int>(ck.meta_int("dropout_passes"));
        restore_stack(ck, "linear", model.linear_head);
    }
    model.stack.version += 1;
    model.linear_head.version += 1;
}

}  // namespace rbfood
