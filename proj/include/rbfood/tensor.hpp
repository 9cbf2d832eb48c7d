#pragma once
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "rbfood/errors.hpp"

namespace rbfood {

// Shape-tagged n-dimensional array of doubles, row-major. The carrier for
// features, parameters, and gradients throughout the project.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    Tensor(std::vector<int> shape_, std::vector<double> data_)
        : shape(std::move(shape_)), data(std::move(data_)) {
        if (static_cast<std::int64_t>(data.size()) != numel_of(shape)) {
            throw ShapeError("tensor data length " + std::to_string(data.size()) +
                             " does not match shape product " + std::to_string(numel_of(shape)));
        }
    }

    static std::int64_t numel_of(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d < 0) throw ShapeError("negative dimension " + std::to_string(d));
            n *= d;  // a zero dimension makes a legal empty tensor
        }
        return n;
    }

    static Tensor zeros(std::vector<int> s) {
        const auto n = numel_of(s);
        return Tensor(std::move(s), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    }

    static Tensor full(std::vector<int> s, double v) {
        const auto n = numel_of(s);
        return Tensor(std::move(s), std::vector<double>(static_cast<std::size_t>(n), v));
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    std::int64_t numel() const { return static_cast<std::int64_t>(data.size()); }
    int ndim() const { return static_cast<int>(shape.size()); }
    int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
    bool empty() const { return data.empty(); }

    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }

    double& operator[](std::int64_t i) { return data[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return data[static_cast<std::size_t>(i)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    bool all_finite() const {
        for (double v : data) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    // Reinterpret as a new shape with the same element count.
    Tensor reshaped(std::vector<int> s) const {
        if (numel_of(s) != numel()) {
            throw ShapeError("reshape " + shape_str(shape) + " -> " + shape_str(s) +
                             " changes element count");
        }
        return Tensor(std::move(s), data);
    }

    static std::string shape_str(const std::vector<int>& s) {
        std::string r = "(";
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i) r += ",";
            r += std::to_string(s[i]);
        }
        return r + ")";
    }

    std::string shape_str() const { return shape_str(shape); }
};

inline Tensor randn_tensor(std::vector<int> shape, class Rng& rng, double stddev = 1.0);

}  // namespace rbfood

#include "rbfood/rng.hpp"

namespace rbfood {
inline Tensor randn_tensor(std::vector<int> shape, Rng& rng, double stddev) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (auto& v : t.data) v = rng.normal() * stddev;
    return t;
}
}  // namespace rbfood
