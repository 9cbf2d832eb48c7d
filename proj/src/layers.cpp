#include "rbfood/layers.hpp"

#include <cmath>
#include <cstring>

#include "rbfood/errors.hpp"
#include "rbfood/kernels.hpp"

namespace rbfood {

namespace {

constexpr double kBnEps = 1e-12;
constexpr double kBnRunningMomentum = 0.9;

// Kaiming-style fan-in init. fan_in counts the inputs contributing to one
// output element: din for dense, 9*cin for conv, cin for the stride-2
// deconv (each output pixel reads exactly one input pixel).
Tensor init_weight(const std::vector<int>& shape, int fan_in, double gain, Rng& rng) {
    return randn_tensor(shape, rng, gain * std::sqrt(2.0 / fan_in));
}

// Spectral norm treats the weight as a (fan_taps*cin) x cout matrix.
int sn_cols(const Layer& l) { return l.weight.shape.back(); }
int sn_rows(const Layer& l) { return static_cast<int>(l.weight.numel()) / sn_cols(l); }

double norm_or_eps(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::max(std::sqrt(s), 1e-12);
}

// sigma = u^T W v for the current state.
double sn_sigma_from_state(const Layer& l) {
    const int rows = sn_rows(l), cols = sn_cols(l);
    double sigma = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* wr = l.weight.data.data() + static_cast<long>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += wr[c] * l.sn_v.data[c];
        sigma += l.sn_u.data[r] * acc;
    }
    return std::max(sigma, 1e-12);
}

// One power iteration: v <- normalize(W^T u), u <- normalize(W v).
void sn_power_iterate(Layer& l) {
    const int rows = sn_rows(l), cols = sn_cols(l);
    std::vector<double> wv(static_cast<std::size_t>(rows));
    for (int c = 0; c < cols; ++c) l.sn_v.data[c] = 0.0;
    for (int r = 0; r < rows; ++r) {
        const double* wr = l.weight.data.data() + static_cast<long>(r) * cols;
        const double ur = l.sn_u.data[r];
        for (int c = 0; c < cols; ++c) l.sn_v.data[c] += wr[c] * ur;
    }
    const double nv = norm_or_eps(l.sn_v.data);
    for (int c = 0; c < cols; ++c) l.sn_v.data[c] /= nv;
    for (int r = 0; r < rows; ++r) {
        const double* wr = l.weight.data.data() + static_cast<long>(r) * cols;
        double acc = 0.0;
        for (int c = 0; c < cols; ++c) acc += wr[c] * l.sn_v.data[c];
        wv[static_cast<std::size_t>(r)] = acc;
    }
    const double nu = norm_or_eps(wv);
    for (int r = 0; r < rows; ++r) l.sn_u.data[r] = wv[static_cast<std::size_t>(r)] / nu;
}

void attach_sn_state(Layer& l, Rng& rng) {
    l.sn_u = randn_tensor({sn_rows(l)}, rng);
    l.sn_v = randn_tensor({sn_cols(l)}, rng);
    sn_power_iterate(l);  // leave u, v consistent with the weight from the start
}

// Chain rule through W_eff = W / sigma with u, v held constant:
// dW = G/sigma - (<G,W>_F / sigma^2) * u v^T.
Tensor sn_weight_grad(const Layer& l, double sigma, const Tensor& g_eff) {
    const int rows = sn_rows(l), cols = sn_cols(l);
    double dot = 0.0;
    for (std::size_t i = 0; i < g_eff.data.size(); ++i) dot += g_eff.data[i] * l.weight.data[i];
    const double coef = dot / (sigma * sigma);
    Tensor g(l.weight.shape, std::vector<double>(l.weight.numel()));
    for (int r = 0; r < rows; ++r) {
        const double ur = l.sn_u.data[r];
        for (int c = 0; c < cols; ++c) {
            const long i = static_cast<long>(r) * cols + c;
            g.data[i] = g_eff.data[i] / sigma - coef * ur * l.sn_v.data[c];
        }
    }
    return g;
}

void require(bool ok, const std::string& msg) {
    if (!ok) throw ShapeError(msg);
}

}  // namespace

int Layer::in_channels() const {
    switch (kind) {
        case LayerKind::Dense: return weight.shape[0];
        case LayerKind::Conv3x3:
        case LayerKind::Deconv2x: return weight.shape[2];
        case LayerKind::BatchNorm: return weight.shape[0];
        default: return -1;
    }
}

int Layer::out_channels() const {
    switch (kind) {
        case LayerKind::Dense: return weight.shape[1];
        case LayerKind::Conv3x3:
        case LayerKind::Deconv2x: return weight.shape[3];
        case LayerKind::BatchNorm: return weight.shape[0];
        default: return -1;
    }
}

Layer dense_layer(int din, int dout, Rng& rng, double gain, bool spectral_norm) {
    if (din <= 0 || dout <= 0) throw ValueError("dense_layer: dimensions must be positive");
    Layer l;
    l.kind = LayerKind::Dense;
    l.weight = init_weight({din, dout}, din, gain, rng);
    l.bias = Tensor::zeros({dout});
    l.spectral_norm = spectral_norm;
    if (spectral_norm) attach_sn_state(l, rng);
    return l;
}

Layer conv3x3_layer(int cin, int cout, Rng& rng, double gain, bool spectral_norm) {
    if (cin <= 0 || cout <= 0) throw ValueError("conv3x3_layer: channels must be positive");
    Layer l;
    l.kind = LayerKind::Conv3x3;
    l.weight = init_weight({3, 3, cin, cout}, 9 * cin, gain, rng);
    l.bias = Tensor::zeros({cout});
    l.spectral_norm = spectral_norm;
    if (spectral_norm) attach_sn_state(l, rng);
    return l;
}

Layer deconv2x_layer(int cin, int cout, Rng& rng, double gain, bool spectral_norm) {
    if (cin <= 0 || cout <= 0) throw ValueError("deconv2x_layer: channels must be positive");
    Layer l;
    l.kind = LayerKind::Deconv2x;
    l.weight = init_weight({2, 2, cin, cout}, cin, gain, rng);
    l.bias = Tensor::zeros({cout});
    l.spectral_norm = spectral_norm;
    if (spectral_norm) attach_sn_state(l, rng);
    return l;
}

Layer relu_layer() {
    Layer l;
    l.kind = LayerKind::Relu;
    return l;
}

Layer batchnorm_layer(int channels) {
    if (channels <= 0) throw ValueError("batchnorm_layer: channels must be positive");
    Layer l;
    l.kind = LayerKind::BatchNorm;
    l.weight = Tensor::full({channels}, 1.0);
    l.bias = Tensor::zeros({channels});
    l.running_mean = Tensor::zeros({channels});
    l.running_var = Tensor::full({channels}, 1.0);
    return l;
}

Layer dropout_layer(double rate) {
    if (rate < 0.0 || rate >= 1.0) throw ValueError("dropout_layer: rate must be in [0,1)");
    Layer l;
    l.kind = LayerKind::Dropout;
    l.rate = rate;
    return l;
}

int LayerStack::output_channels() const {
    for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
        if (it->kind == LayerKind::Dense || it->kind == LayerKind::Conv3x3 ||
            it->kind == LayerKind::Deconv2x)
            return it->out_channels();
    }
    return -1;
}

void StackGrads::accumulate(const StackGrads& other) {
    if (dweight.size() != other.dweight.size())
        throw ShapeError("StackGrads::accumulate: layer count mismatch");
    for (std::size_t i = 0; i < dweight.size(); ++i) {
        if (dweight[i].empty()) continue;
        if (!dweight[i].same_shape(other.dweight[i]) || !dbias[i].same_shape(other.dbias[i]))
            throw ShapeError("StackGrads::accumulate: shape mismatch at layer " +
                             std::to_string(i));
        for (std::size_t j = 0; j < dweight[i].data.size(); ++j)
            dweight[i].data[j] += other.dweight[i].data[j];
        for (std::size_t j = 0; j < dbias[i].data.size(); ++j)
            dbias[i].data[j] += other.dbias[i].data[j];
    }
}

void StackGrads::scale(double factor) {
    for (auto& t : dweight)
        for (double& x : t.data) x *= factor;
    for (auto& t : dbias)
        for (double& x : t.data) x *= factor;
}

Tensor forward_stack(LayerStack& stack, const Tensor& input,
                     std::optional<std::uint64_t> dropout_seed, StackCache* cache,
                     bool update_state) {
    if (input.empty()) throw ShapeError("forward_stack: empty input");
    const bool train = stack.mode == Mode::Train;
    if (cache) {
        cache->layers.assign(stack.layers.size(), LayerCache{});
        cache->mode = stack.mode;
        cache->version = stack.version;
    }
    Tensor cur = input;
    for (std::size_t li = 0; li < stack.layers.size(); ++li) {
        Layer& l = stack.layers[li];
        LayerCache* lc = cache ? &cache->layers[li] : nullptr;
        if (lc && l.kind != LayerKind::BatchNorm) lc->input = cur;
        switch (l.kind) {
            case LayerKind::Dense: {
                const int din = l.weight.shape[0], dout = l.weight.shape[1];
                require(cur.shape.back() == din, "dense: input has " +
                                                     std::to_string(cur.shape.back()) +
                                                     " channels, weight expects " +
                                                     std::to_string(din));
                const int rows = static_cast<int>(cur.numel()) / din;
                std::vector<int> oshape = cur.shape;
                oshape.back() = dout;
                Tensor out(oshape, std::vector<double>(static_cast<std::size_t>(rows) * dout));
                const Tensor* w = &l.weight;
                double sigma = 1.0;
                if (l.spectral_norm) {
                    if (train && update_state) sn_power_iterate(l);
                    sigma = sn_sigma_from_state(l);
                    Tensor eff(l.weight.shape, l.weight.data);
                    for (double& x : eff.data) x /= sigma;
                    if (lc) {
                        lc->sn_sigma = sigma;
                        lc->eff_weight = std::move(eff);
                        w = &lc->eff_weight;
                    } else {
                        static thread_local Tensor tmp;
                        tmp = std::move(eff);
                        w = &tmp;
                    }
                }
                kern::dense_forward(cur.ptr(), rows, din, w->ptr(), l.bias.ptr(), dout,
                                    out.data.data());
                cur = std::move(out);
                break;
            }
            case LayerKind::Conv3x3:
            case LayerKind::Deconv2x: {
                const bool deconv = l.kind == LayerKind::Deconv2x;
                const int cin = l.in_channels(), cout = l.out_channels();
                require(cur.ndim() == 4, "conv: input must be rank 4 (N,H,W,C), got rank " +
                                             std::to_string(cur.ndim()));
                require(cur.shape[3] == cin, "conv: input has " + std::to_string(cur.shape[3]) +
                                                 " channels, kernel expects " +
                                                 std::to_string(cin));
                const int n = cur.shape[0], h = cur.shape[1], w = cur.shape[2];
                const int oh = deconv ? 2 * h : h, ow = deconv ? 2 * w : w;
                Tensor out({n, oh, ow, cout},
                           std::vector<double>(static_cast<std::size_t>(n) * oh * ow * cout));
                const Tensor* wt = &l.weight;
                double sigma = 1.0;
                if (l.spectral_norm) {
                    if (train && update_state) sn_power_iterate(l);
                    sigma = sn_sigma_from_state(l);
                    Tensor eff(l.weight.shape, l.weight.data);
                    for (double& x : eff.data) x /= sigma;
                    if (lc) {
                        lc->sn_sigma = sigma;
                        lc->eff_weight = std::move(eff);
                        wt = &lc->eff_weight;
                    } else {
                        static thread_local Tensor tmp;
                        tmp = std::move(eff);
                        wt = &tmp;
                    }
                }
                if (deconv)
                    kern::deconv2x_forward(cur.ptr(), n, h, w, cin, wt->ptr(), l.bias.ptr(),
                                           cout, out.data.data());
                else
                    kern::conv3x3_forward(cur.ptr(), n, h, w, cin, wt->ptr(), l.bias.ptr(),
                                          cout, out.data.data());
                cur = std::move(out);
                break;
            }
            case LayerKind::Relu: {
                Tensor out = cur;
                for (double& x : out.data) x = x > 0.0 ? x : 0.0;
                cur = std::move(out);
                break;
            }
            case LayerKind::BatchNorm: {
                const int c = l.weight.shape[0];
                require(cur.shape.back() == c, "batchnorm: input has " +
                                                   std::to_string(cur.shape.back()) +
                                                   " channels, expects " + std::to_string(c));
                const long rows = cur.numel() / c;
                Tensor mean(std::vector<int>{c}, std::vector<double>(c, 0.0));
                Tensor var(std::vector<int>{c}, std::vector<double>(c, 0.0));
                if (train) {
                    for (long r = 0; r < rows; ++r)
                        for (int j = 0; j < c; ++j) mean.data[j] += cur.data[r * c + j];
                    for (int j = 0; j < c; ++j) mean.data[j] /= static_cast<double>(rows);
                    for (long r = 0; r < rows; ++r)
                        for (int j = 0; j < c; ++j) {
                            const double d = cur.data[r * c + j] - mean.data[j];
                            var.data[j] += d * d;
                        }
                    for (int j = 0; j < c; ++j) var.data[j] /= static_cast<double>(rows);
                    if (update_state) {
                        for (int j = 0; j < c; ++j) {
                            l.running_mean.data[j] =
                                kBnRunningMomentum * l.running_mean.data[j] +
                                (1.0 - kBnRunningMomentum) * mean.data[j];
                            l.running_var.data[j] =
                                kBnRunningMomentum * l.running_var.data[j] +
                                (1.0 - kBnRunningMomentum) * var.data[j];
                        }
                    }
                } else {
                    mean.data = l.running_mean.data;
                    var.data = l.running_var.data;
                }
                Tensor out = cur;
                Tensor xhat = cur;
                for (long r = 0; r < rows; ++r)
                    for (int j = 0; j < c; ++j) {
                        const double istd = 1.0 / std::sqrt(var.data[j] + kBnEps);
                        const double xh = (cur.data[r * c + j] - mean.data[j]) * istd;
                        xhat.data[r * c + j] = xh;
                        out.data[r * c + j] = l.weight.data[j] * xh + l.bias.data[j];
                    }
                if (lc) {
                    lc->aux = std::move(xhat);
                    lc->mean = std::move(mean);
                    lc->var = std::move(var);
                }
                cur = std::move(out);
                break;
            }
            case LayerKind::Dropout: {
                if (!train) break;  // identity in evaluation mode
                if (!dropout_seed)
                    throw ConfigError("forward_stack: dropout in training mode needs a seed");
                Rng r(mix_seed(*dropout_seed, static_cast<std::uint64_t>(li)));
                const double keep = 1.0 - l.rate;
                Tensor mask = cur;
                for (double& x : mask.data) x = (r.uniform01() < keep) ? 1.0 / keep : 0.0;
                Tensor out = cur;
                for (std::size_t j = 0; j < out.data.size(); ++j) out.data[j] *= mask.data[j];
                if (lc) lc->aux = std::move(mask);
                cur = std::move(out);
                break;
            }
        }
    }
    if (cache) cache->output = cur;
    return cur;
}

Tensor forward_eval(const LayerStack& stack, const Tensor& input) {
    LayerStack& mut = const_cast<LayerStack&>(stack);
    const Mode saved = mut.mode;
    mut.mode = Mode::Eval;
    Tensor out;
    try {
        out = forward_stack(mut, input, std::nullopt, nullptr, false);
    } catch (...) {
        mut.mode = saved;
        throw;
    }
    mut.mode = saved;
    return out;
}

BackwardResult backward_stack(const LayerStack& stack, const StackCache& cache,
                              const Tensor& output_grad) {
    if (cache.version != stack.version)
        throw ValueError("backward_stack: cache is stale (parameters changed since forward)");
    if (cache.layers.size() != stack.layers.size())
        throw ShapeError("backward_stack: cache does not match stack");
    if (!output_grad.same_shape(cache.output))
        throw ShapeError("backward_stack: output_grad shape " + output_grad.shape_str() +
                         " does not match forward output " + cache.output.shape_str());
    const bool train_stats = cache.mode == Mode::Train;
    StackGrads grads;
    grads.dweight.resize(stack.layers.size());
    grads.dbias.resize(stack.layers.size());
    Tensor g = output_grad;
    for (int li = static_cast<int>(stack.layers.size()) - 1; li >= 0; --li) {
        const Layer& l = stack.layers[li];
        const LayerCache& lc = cache.layers[li];
        switch (l.kind) {
            case LayerKind::Dense: {
                const int din = l.weight.shape[0], dout = l.weight.shape[1];
                const int rows = static_cast<int>(lc.input.numel()) / din;
                const Tensor& w = l.spectral_norm ? lc.eff_weight : l.weight;
                Tensor dw({din, dout}, std::vector<double>(static_cast<std::size_t>(din) * dout));
                Tensor db({dout}, std::vector<double>(dout));
                kern::dense_backward_params(lc.input.ptr(), g.ptr(), rows, din, dout,
                                            dw.data.data(), db.data.data());
                Tensor gin = lc.input;
                kern::dense_backward_input(g.ptr(), rows, dout, w.ptr(), din, gin.data.data());
                if (l.spectral_norm) dw = sn_weight_grad(l, lc.sn_sigma, dw);
                grads.dweight[li] = std::move(dw);
                grads.dbias[li] = std::move(db);
                g = std::move(gin);
                break;
            }
            case LayerKind::Conv3x3:
            case LayerKind::Deconv2x: {
                const bool deconv = l.kind == LayerKind::Deconv2x;
                const int cin = l.in_channels(), cout = l.out_channels();
                const int n = lc.input.shape[0], h = lc.input.shape[1], w = lc.input.shape[2];
                const Tensor& wt = l.spectral_norm ? lc.eff_weight : l.weight;
                Tensor dw(l.weight.shape, std::vector<double>(l.weight.numel()));
                Tensor db({cout}, std::vector<double>(cout));
                Tensor gin = lc.input;
                if (deconv) {
                    kern::deconv2x_backward_params(lc.input.ptr(), g.ptr(), n, h, w, cin, cout,
                                                   dw.data.data(), db.data.data());
                    kern::deconv2x_backward_input(g.ptr(), n, h, w, cout, wt.ptr(), cin,
                                                  gin.data.data());
                } else {
                    kern::conv3x3_backward_params(lc.input.ptr(), g.ptr(), n, h, w, cin, cout,
                                                  dw.data.data(), db.data.data());
                    kern::conv3x3_backward_input(g.ptr(), n, h, w, cout, wt.ptr(), cin,
                                                 gin.data.data());
                }
                if (l.spectral_norm) dw = sn_weight_grad(l, lc.sn_sigma, dw);
                grads.dweight[li] = std::move(dw);
                grads.dbias[li] = std::move(db);
                g = std::move(gin);
                break;
            }
            case LayerKind::Relu: {
                Tensor gin = g;
                for (std::size_t j = 0; j < gin.data.size(); ++j)
                    if (lc.input.data[j] <= 0.0) gin.data[j] = 0.0;
                g = std::move(gin);
                break;
            }
            case LayerKind::BatchNorm: {
                const int c = l.weight.shape[0];
                const long rows = g.numel() / c;
                const Tensor& xhat = lc.aux;
                Tensor dgamma({c}, std::vector<double>(c, 0.0));
                Tensor dbeta({c}, std::vector<double>(c, 0.0));
                for (long r = 0; r < rows; ++r)
                    for (int j = 0; j < c; ++j) {
                        dbeta.data[j] += g.data[r * c + j];
                        dgamma.data[j] += g.data[r * c + j] * xhat.data[r * c + j];
                    }
                Tensor gin = g;
                for (int j = 0; j < c; ++j) {
                    const double istd = 1.0 / std::sqrt(lc.var.data[j] + kBnEps);
                    const double gs = l.weight.data[j] * istd;
                    if (train_stats) {
                        const double m = static_cast<double>(rows);
                        const double s1 = dbeta.data[j] / m, s2 = dgamma.data[j] / m;
                        for (long r = 0; r < rows; ++r)
                            gin.data[r * c + j] =
                                gs * (g.data[r * c + j] - s1 - xhat.data[r * c + j] * s2);
                    } else {
                        for (long r = 0; r < rows; ++r) gin.data[r * c + j] = gs * g.data[r * c + j];
                    }
                }
                grads.dweight[li] = std::move(dgamma);
                grads.dbias[li] = std::move(dbeta);
                g = std::move(gin);
                break;
            }
            case LayerKind::Dropout: {
                if (cache.mode == Mode::Eval) break;
                Tensor gin = g;
                for (std::size_t j = 0; j < gin.data.size(); ++j) gin.data[j] *= lc.aux.data[j];
                g = std::move(gin);
                break;
            }
        }
    }
    return BackwardResult{std::move(g), std::move(grads)};
}

std::vector<Tensor*> trainable_params(LayerStack& stack) {
    std::vector<Tensor*> out;
    for (auto& l : stack.layers) {
        if (!l.has_params()) continue;
        out.push_back(&l.weight);
        out.push_back(&l.bias);
    }
    return out;
}

std::vector<const Tensor*> flat_grads(const LayerStack& stack, const StackGrads& grads) {
    std::vector<const Tensor*> out;
    for (std::size_t i = 0; i < stack.layers.size(); ++i) {
        if (!stack.layers[i].has_params()) continue;
        out.push_back(&grads.dweight[i]);
        out.push_back(&grads.dbias[i]);
    }
    return out;
}

}  // namespace rbfood
