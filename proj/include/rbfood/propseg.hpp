#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rbfood/config.hpp"
#include "rbfood/io.hpp"
#include "rbfood/layers.hpp"
#include "rbfood/rbf_head.hpp"
#include "rbfood/synthbench.hpp"
#include "rbfood/tensor.hpp"

namespace rbfood {

enum class SegHead { kRbf, kDropout, kEntropy };
enum class SegRegularizer { kNone, kGp, kBoundary };

SegHead parse_seg_head(const std::string& name);
const char* seg_head_name(SegHead head);
SegRegularizer parse_seg_regularizer(const std::string& name);
const char* seg_regularizer_name(SegRegularizer reg);

// Per-proposal segmentation model: feature stack from 14x14 proposal features
// to 28x28 per-pixel embeddings, plus one of three scoring heads. With zero
// conv layers the stack is empty and the head reads the nearest-upsampled
// input channels directly.
struct PropSegModel {
    SegHead head_kind = SegHead::kRbf;
    int input_channels = 0;            // feature channels each proposal carries
    std::vector<int> trained_classes;  // ascending class ids scored by the head
    LayerStack stack;                  // empty for the no-conv variant
    RbfHead head;                      // kRbf only
    LayerStack linear_head;            // kEntropy: dense; kDropout: dropout + dense
    int dropout_passes = 10;           // T for the dropout baseline

    int class_count() const { return static_cast<int>(trained_classes.size()); }
};

// Rejects inconsistent settings (a regularizer with a non-RBF head) with the
// offending key named. seg.bg_only restricts trained classes to the
// background ids; seg.conv_layers = 0 selects the no-conv variant.
PropSegModel build_propseg_model(const Config& config, std::uint64_t seed);

struct SegOutput {
    Tensor class_map;  // (28,28) predicted class ids
    Tensor u_seg;      // (28,28) uncertainty in [0,1]
    Tensor h_maps;     // (28,28,C) per-class scores (probabilities for baselines)
};

// Scores one proposal's features (14,14,F). The dropout baseline averages
// softmax probabilities over T train-mode passes derived from `seed`; the
// other heads ignore `seed` and are deterministic.
SegOutput segment_proposal(const PropSegModel& model, const Tensor& features,
                           std::uint64_t seed = 0);

// A pixel is background iff its best background-class score exceeds
// 1 - theta_bg; the mask is the complement. theta_bg in (0,1).
Tensor binary_object_mask(const SegOutput& seg, const std::vector<int>& trained_classes,
                          double theta_bg);

struct SegEpochLog {
    int epoch = 0;
    double l_in = 0.0;
    double l_bd = 0.0;
    double l_reg = 0.0;
    double pixel_acc = 0.0;  // over pixels contributing to l_in
};

// Trains in place on train-split proposals. Ignore-labeled pixels never
// contribute; boundary-labeled pixels feed boundary_loss only under the
// boundary regularizer; with seg.bg_only object pixels are excluded from the
// in-distribution term. Throws TrainingDiverged on a non-finite loss and
// ValueError if the split contains unknown-class pixels.
std::vector<SegEpochLog> train_propseg(PropSegModel& model,
                                       const std::vector<Proposal>& proposals,
                                       const Config& config, std::uint64_t seed);

// Checkpoint round-trip. Restore validates names and shapes against the
// freshly built model and bumps the stack version.
Checkpoint propseg_checkpoint(const PropSegModel& model);
void restore_propseg(PropSegModel& model, const Checkpoint& ck);

// (N,H,W,C) -> (N,2H,2W,C) pixel duplication; the no-conv resize.
Tensor upsample2x_nearest(const Tensor& maps);

}  // namespace rbfood
