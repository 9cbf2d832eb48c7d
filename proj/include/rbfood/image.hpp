#pragma once

#include "rbfood/tensor.hpp"

namespace rbfood {

// Axis-aligned box in image pixels, top-left origin.
struct Box {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
};

// Intersection area over union area; 0 for disjoint boxes.
double box_iou(const Box& a, const Box& b);

// Crops `box` out of an (H,W,C) image and resamples it to out_h x out_w by
// bilinear interpolation between pixel centers (centers at integer + 0.5),
// clamping samples to the image border.
Tensor roi_bilinear(const Tensor& src, const Box& box, int out_h, int out_w);

// Same crop geometry with nearest-neighbor sampling, for label maps.
// src is (H,W); each output cell takes the pixel containing its center.
Tensor roi_nearest(const Tensor& src, const Box& box, int out_h, int out_w);

// Whole-image resizes: the ROI versions with a full-image box.
Tensor resize_bilinear(const Tensor& src, int out_h, int out_w);
Tensor resize_nearest(const Tensor& src, int out_h, int out_w);

}  // namespace rbfood
