#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rbfood/config.hpp"
#include "rbfood/image.hpp"
#include "rbfood/tensor.hpp"

namespace rbfood {

// Class ids. 0..2 are background regions, 3..5 are object classes seen in
// training, 6..7 are object classes reserved for the out-of-distribution test
// split and never placed in training scenes.
constexpr int kClassGround = 0;
constexpr int kClassSky = 1;
constexpr int kClassWall = 2;
constexpr int kClassSquare = 3;
constexpr int kClassCircle = 4;
constexpr int kClassTriangle = 5;
constexpr int kClassStar = 6;
constexpr int kClassCross = 7;
constexpr int kNumClasses = 8;

// Sentinel gt_class for proposals matching no instance.
constexpr int kGtBackground = 8;

// Sentinel values inside 28x28 proposal label maps.
constexpr double kIgnoreLabel = -1.0;    // resampling artifact, excluded from losses
constexpr double kBoundaryLabel = -2.0;  // object/background transition band

constexpr int kSplitTrain = 0;
constexpr int kSplitTestKnown = 1;
constexpr int kSplitTestOod = 2;

bool is_background_class(int class_id);
bool is_known_object_class(int class_id);
bool is_unknown_class(int class_id);
const char* class_name(int class_id);  // accepts kGtBackground
const char* split_name(int split);

struct SceneInstance {
    Box box;
    int class_id = 0;
    Tensor mask;  // (h, w) 0/1, box-local, independent of later occlusion
};

struct SyntheticScene {
    int id = 0;
    Tensor image;         // (H, W, 3) in [0, 1]
    Tensor pixel_labels;  // (H, W) class ids; later instances occlude earlier
    std::vector<SceneInstance> instances;
};

struct SceneParams {
    int height = 96;
    int width = 96;
    std::vector<int> shapes;  // object class ids in placement order
    int min_size = 18;
    int max_size = 40;
    double overlap_limit = 0.3;  // maximum box IoU between placed instances
    int max_place_tries = 100;
};

// Renders background bands (sky / wall / ground, vertical gradient plus seeded
// noise) and places the requested shapes by rejection sampling so that no two
// instance boxes exceed overlap_limit IoU. Deterministic in (params, seed).
// Throws ValueError when a shape cannot be placed within max_place_tries.
SyntheticScene generate_scene(const SceneParams& params, std::uint64_t seed);

enum class FeatureRecipe {
    kAppearance,  // RGB crop + 2 normalized-coordinate channels, F=5
    kContext,     // appearance + 3 blurred double-size-crop channels, F=8
};

FeatureRecipe parse_recipe(const std::string& name);  // ConfigError on unknown name
const char* recipe_name(FeatureRecipe recipe);
int recipe_channels(FeatureRecipe recipe);

struct Proposal {
    int scene_id = 0;
    int id = 0;
    int split = kSplitTrain;
    int gt_class = kGtBackground;
    Box box;
    Tensor features;  // (14, 14, F)
    Tensor labels28;  // (28, 28) class id, kBoundaryLabel, or kIgnoreLabel
};

// Crops the box out of the scene: features bilinearly resampled to 14x14 with
// the recipe's channels, labels nearest-resampled to 28x28, then a Chebyshev
// band of `boundary_radius` around object/background transitions is marked
// kBoundaryLabel and cells whose 2x supersampled labels disagree (content lost
// by resampling) are marked kIgnoreLabel. gt_class is the auto-label under
// iou_threshold. The box must lie inside the image and have positive area.
Proposal render_proposal(const SyntheticScene& scene, const Box& box, FeatureRecipe recipe,
                         int boundary_radius = 1, double iou_threshold = 0.5);

// (row, col) pixels whose Chebyshev-radius neighborhood contains both an
// object-class and a background-class pixel, in row-major order. Sentinel
// labels count as neither. radius must be >= 1.
std::vector<std::pair<int, int>> extract_boundary_pixels(const Tensor& labels28, int radius);

// Class id of the instance with the highest box IoU if that IoU exceeds
// iou_threshold, else kGtBackground. iou_threshold must lie in (0, 1).
int auto_label(const Box& box, const std::vector<SceneInstance>& instances, double iou_threshold);

struct SceneDataset {
    std::string recipe;
    int feature_dim = 0;
    std::vector<SyntheticScene> scenes;     // train scenes first, then test
    std::vector<Proposal> proposals;        // generation order, ids sequential
};

// Generates bench.train_scenes training scenes (known shapes only) and
// bench.test_scenes test scenes (known + unknown shapes), then proposals per
// scene: bench.jitter_per_object jittered copies of each instance box plus
// half as many background boxes. Test proposals overlapping an unknown
// instance box go to kSplitTestOod, the rest to kSplitTestKnown.
SceneDataset generate_dataset(const Config& config, std::uint64_t seed);

void save_dataset(const std::string& path, const SceneDataset& ds);
SceneDataset load_dataset(const std::string& path);

// CSV with one row per proposal: scene,proposal,split,gt_class (names).
void write_dataset_index(const std::string& path, const SceneDataset& ds);

}  // namespace rbfood
