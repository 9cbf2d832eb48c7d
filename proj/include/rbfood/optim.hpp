#pragma once

#include <vector>

#include "rbfood/tensor.hpp"

namespace rbfood {

struct SgdConfig {
    double lr = 0.1;
    double momentum = 0.9;
    double decay_factor = 10.0;  // learning rate divided by this ...
    int decay_period = 10;       // ... every this many epochs
};

// SGD with classical momentum: v <- momentum*v - lr*g; p <- p + v.
class SgdOptimizer {
  public:
    explicit SgdOptimizer(SgdConfig cfg);

    double lr_for_epoch(int epoch) const;

    // Applies one update. `params` and `grads` must stay positionally stable
    // across calls; velocity buffers are created on first use and must keep
    // matching shapes afterwards.
    void step(const std::vector<Tensor*>& params, const std::vector<const Tensor*>& grads,
              int epoch);

    const SgdConfig& config() const { return cfg_; }

  private:
    SgdConfig cfg_;
    std::vector<Tensor> velocity_;
};

}  // namespace rbfood
