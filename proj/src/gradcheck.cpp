#include "rbfood/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "rbfood/errors.hpp"

namespace rbfood {

double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& point,
                         const Tensor& analytic_grad, double epsilon) {
    if (epsilon <= 0.0) throw ValueError("finite_diff_check: epsilon must be positive");
    if (!point.same_shape(analytic_grad))
        throw ShapeError("finite_diff_check: gradient shape " + analytic_grad.shape_str() +
                         " does not match point " + point.shape_str());
    Tensor probe = point;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.data.size(); ++i) {
        const double saved = probe.data[i];
        probe.data[i] = saved + epsilon;
        const double hi = f(probe);
        probe.data[i] = saved - epsilon;
        const double lo = f(probe);
        probe.data[i] = saved;
        const double central = (hi - lo) / (2.0 * epsilon);
        const double analytic = analytic_grad.data[i];
        const double denom = std::max({std::abs(analytic), std::abs(central), 1e-12});
        worst = std::max(worst, std::abs(analytic - central) / denom);
    }
    return worst;
}

}  // namespace rbfood
