#include "rbfood/optim.hpp"

#include <cmath>

#include "rbfood/errors.hpp"

namespace rbfood {

SgdOptimizer::SgdOptimizer(SgdConfig cfg) : cfg_(cfg) {
    if (cfg_.lr < 0.0) throw ConfigError("sgd: learning rate must be nonnegative");
    if (cfg_.momentum < 0.0 || cfg_.momentum >= 1.0)
        throw ConfigError("sgd: momentum must be in [0,1)");
    if (cfg_.decay_period <= 0) throw ConfigError("sgd: decay period must be positive");
    if (cfg_.decay_factor <= 0.0) throw ConfigError("sgd: decay factor must be positive");
}

double SgdOptimizer::lr_for_epoch(int epoch) const {
    if (epoch < 0) throw ValueError("sgd: epoch must be nonnegative");
    return cfg_.lr / std::pow(cfg_.decay_factor, epoch / cfg_.decay_period);
}

void SgdOptimizer::step(const std::vector<Tensor*>& params,
                        const std::vector<const Tensor*>& grads, int epoch) {
    if (params.size() != grads.size())
        throw ShapeError("sgd: parameter and gradient counts differ");
    if (velocity_.empty()) {
        velocity_.reserve(params.size());
        for (const Tensor* p : params) velocity_.push_back(Tensor::zeros(p->shape));
    }
    if (velocity_.size() != params.size())
        throw ShapeError("sgd: parameter count changed between steps");
    const double lr = lr_for_epoch(epoch);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = *params[i];
        const Tensor& g = *grads[i];
        Tensor& v = velocity_[i];
        if (!p.same_shape(v) || !p.same_shape(g))
            throw ShapeError("sgd: shape mismatch at parameter " + std::to_string(i));
        for (std::size_t j = 0; j < p.data.size(); ++j) {
            v.data[j] = cfg_.momentum * v.data[j] - lr * g.data[j];
            p.data[j] += v.data[j];
        }
    }
}

}  // namespace rbfood
