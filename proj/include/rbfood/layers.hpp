#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rbfood/rng.hpp"
#include "rbfood/tensor.hpp"

namespace rbfood {

enum class LayerKind { Dense, Conv3x3, Deconv2x, Relu, BatchNorm, Dropout };
enum class Mode { Train, Eval };

// One layer of a sequential stack. Activations are NHWC (channels last);
// Dense contracts the last axis and keeps the leading ones, so it applies
// equally to (N,D) rows and (N,H,W,C) maps.
struct Layer {
    LayerKind kind;
    Tensor weight;  // Dense (din,dout); Conv3x3 (3,3,cin,cout); Deconv2x (2,2,cin,cout);
                    // BatchNorm gamma (c)
    Tensor bias;    // (dout)/(cout); BatchNorm beta (c)
    Tensor running_mean, running_var;  // BatchNorm only
    double rate = 0.5;                 // Dropout only
    bool spectral_norm = false;        // Dense/Conv3x3/Deconv2x only
    Tensor sn_u, sn_v;                 // persisted power-iteration state

    bool has_params() const {
        return kind == LayerKind::Dense || kind == LayerKind::Conv3x3 ||
               kind == LayerKind::Deconv2x || kind == LayerKind::BatchNorm;
    }
    int in_channels() const;
    int out_channels() const;
};

Layer dense_layer(int din, int dout, Rng& rng, double gain = 1.0, bool spectral_norm = false);
Layer conv3x3_layer(int cin, int cout, Rng& rng, double gain = 1.0, bool spectral_norm = false);
Layer deconv2x_layer(int cin, int cout, Rng& rng, double gain = 1.0,
                     bool spectral_norm = false);
Layer relu_layer();
Layer batchnorm_layer(int channels);
Layer dropout_layer(double rate);

struct LayerStack {
    std::vector<Layer> layers;
    Mode mode = Mode::Train;
    std::uint64_t version = 0;  // bumped whenever parameters change

    int output_channels() const;  // channels produced by the last parametric layer
};

struct LayerCache {
    Tensor input;           // activation fed to the layer
    Tensor aux;             // Dropout: scaled keep mask; BatchNorm: normalized input
    Tensor mean, var;       // BatchNorm: statistics the forward used
    double sn_sigma = 1.0;  // spectral-norm scale the forward used
    Tensor eff_weight;      // weight / sn_sigma when spectral_norm is set
};

struct StackCache {
    std::vector<LayerCache> layers;
    Tensor output;
    Mode mode = Mode::Train;
    std::uint64_t version = 0;
};

// Per-layer parameter gradients, indexed like LayerStack::layers. Layers
// without parameters hold empty tensors.
struct StackGrads {
    std::vector<Tensor> dweight, dbias;

    void accumulate(const StackGrads& other);  // this += other
    void scale(double factor);
};

// Runs the stack. In Train mode `dropout_seed` must be set when the stack
// contains Dropout layers (each layer derives its own stream from it), and
// `update_state` controls the step side effects: one spectral-norm power
// iteration per such layer and the BatchNorm running-statistic update.
// Passing update_state = false replays the exact function of the previous
// updating pass, which the finite-difference penalty passes rely on.
// Eval mode never mutates the stack.
Tensor forward_stack(LayerStack& stack, const Tensor& input,
                     std::optional<std::uint64_t> dropout_seed = std::nullopt,
                     StackCache* cache = nullptr, bool update_state = true);

// Eval-mode forward that leaves the stack untouched.
Tensor forward_eval(const LayerStack& stack, const Tensor& input);

struct BackwardResult {
    Tensor input_grad;
    StackGrads grads;
};

// Backpropagates through the pass recorded in `cache`. Throws ValueError if
// the stack's parameters changed since the cache was produced.
BackwardResult backward_stack(const LayerStack& stack, const StackCache& cache,
                              const Tensor& output_grad);

// Pointers to the trainable tensors in a fixed order (weight then bias per
// parametric layer). flat_grads returns the matching gradient tensors.
std::vector<Tensor*> trainable_params(LayerStack& stack);
std::vector<const Tensor*> flat_grads(const LayerStack& stack, const StackGrads& grads);

}  // namespace rbfood
