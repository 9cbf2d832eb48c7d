#include "rbfood/image.hpp"

#include <algorithm>
#include <cmath>

#include "rbfood/errors.hpp"

namespace rbfood {

namespace {

int clamp_index(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

void check_box(const Box& box) {
    if (!(box.w > 0.0) || !(box.h > 0.0))
        throw ValueError("degenerate box: w and h must be positive");
}

}  // namespace

namespace {

bool box_before(const Box& a, const Box& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    if (a.w != b.w) return a.w < b.w;
    return a.h < b.h;
}

}  // namespace

double box_iou(const Box& a, const Box& b) {
    check_box(a);
    check_box(b);
    // Canonical argument order keeps the result bitwise symmetric even when
    // the compiler contracts the area sums into fused multiply-adds.
    if (box_before(b, a)) return box_iou(b, a);
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return inter / uni;
}

Tensor roi_bilinear(const Tensor& src, const Box& box, int out_h, int out_w) {
    if (src.shape.size() != 3)
        throw ShapeError("roi_bilinear expects (H,W,C), got " + src.shape_str());
    check_box(box);
    if (out_h < 1 || out_w < 1) throw ValueError("output size must be positive");
    const int sh = src.shape[0], sw = src.shape[1], c = src.shape[2];
    Tensor out = Tensor::zeros({out_h, out_w, c});
    for (int i = 0; i < out_h; ++i) {
        const double py = box.y + (i + 0.5) * box.h / out_h - 0.5;
        const int y0 = static_cast<int>(std::floor(py));
        const double fy = py - y0;
        const int ya = clamp_index(y0, sh - 1), yb = clamp_index(y0 + 1, sh - 1);
        for (int j = 0; j < out_w; ++j) {
            const double px = box.x + (j + 0.5) * box.w / out_w - 0.5;
            const int x0 = static_cast<int>(std::floor(px));
            const double fx = px - x0;
            const int xa = clamp_index(x0, sw - 1), xb = clamp_index(x0 + 1, sw - 1);
            const double* r00 = src.ptr() + (static_cast<std::size_t>(ya) * sw + xa) * c;
            const double* r01 = src.ptr() + (static_cast<std::size_t>(ya) * sw + xb) * c;
            const double* r10 = src.ptr() + (static_cast<std::size_t>(yb) * sw + xa) * c;
            const double* r11 = src.ptr() + (static_cast<std::size_t>(yb) * sw + xb) * c;
            double* dst = out.data.data() + (static_cast<std::size_t>(i) * out_w + j) * c;
            for (int ch = 0; ch < c; ++ch) {
                const double top = r00[ch] + fx * (r01[ch] - r00[ch]);
                const double bot = r10[ch] + fx * (r11[ch] - r10[ch]);
                dst[ch] = top + fy * (bot - top);
            }
        }
    }
    return out;
}

Tensor roi_nearest(const Tensor& src, const Box& box, int out_h, int out_w) {
    if (src.shape.size() != 2)
        throw ShapeError("roi_nearest expects (H,W), got " + src.shape_str());
    check_box(box);
    if (out_h < 1 || out_w < 1) throw ValueError("output size must be positive");
    const int sh = src.shape[0], sw = src.shape[1];
    Tensor out = Tensor::zeros({out_h, out_w});
    for (int i = 0; i < out_h; ++i) {
        const int sy = clamp_index(
            static_cast<int>(std::floor(box.y + (i + 0.5) * box.h / out_h)), sh - 1);
        for (int j = 0; j < out_w; ++j) {
            const int sx = clamp_index(
                static_cast<int>(std::floor(box.x + (j + 0.5) * box.w / out_w)), sw - 1);
            out.data[static_cast<std::size_t>(i) * out_w + j] =
                src.data[static_cast<std::size_t>(sy) * sw + sx];
        }
    }
    return out;
}

Tensor resize_bilinear(const Tensor& src, int out_h, int out_w) {
    return roi_bilinear(src, {0.0, 0.0, static_cast<double>(src.shape[1]),
                              static_cast<double>(src.shape[0])},
                        out_h, out_w);
}

Tensor resize_nearest(const Tensor& src, int out_h, int out_w) {
    return roi_nearest(src, {0.0, 0.0, static_cast<double>(src.shape[1]),
                             static_cast<double>(src.shape[0])},
                       out_h, out_w);
}

}  // namespace rbfood
