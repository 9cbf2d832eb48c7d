#pragma once

#include <functional>

#include "rbfood/tensor.hpp"

namespace rbfood {

// Compares an analytic gradient against central differences of `f` around
// `point`. Returns the max over components of
// |analytic - central| / max(|analytic|, |central|, 1e-12).
double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& point,
                         const Tensor& analytic_grad, double epsilon);

}  // namespace rbfood
