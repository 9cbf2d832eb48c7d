#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "rbfood/errors.hpp"
#include "rbfood/io.hpp"
#include "rbfood/rng.hpp"
#include "rbfood/synthbench.hpp"

using namespace rbfood;

namespace {

std::vector<std::pair<int, int>> boundary_oracle(const Tensor& m, int r) {
    const int h = m.shape[0], w = m.shape[1];
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            bool has_obj = false, has_bg = false;
            for (int di = -r; di <= r; ++di) {
                for (int dj = -r; dj <= r; ++dj) {
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || ii >= h || jj < 0 || jj >= w) continue;
                    const double v = m.data[static_cast<std::size_t>(ii) * w + jj];
                    has_obj = has_obj || (v >= kClassSquare && v <= kClassCross);
                    has_bg = has_bg || (v >= kClassGround && v <= kClassWall);
                }
            }
            if (has_obj && has_bg) out.emplace_back(i, j);
        }
    }
    return out;
}

double intersection_area(const Box& a, const Box& b) {
    const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    return ix > 0.0 && iy > 0.0 ? ix * iy : 0.0;
}

SyntheticScene flat_scene(int h, int w, double r, double g, double b, int label) {
    SyntheticScene scene;
    scene.image = Tensor::zeros({h, w, 3});
    for (int i = 0; i < h * w; ++i) {
        scene.image.data[static_cast<std::size_t>(i) * 3 + 0] = r;
        scene.image.data[static_cast<std::size_t>(i) * 3 + 1] = g;
        scene.image.data[static_cast<std::size_t>(i) * 3 + 2] = b;
    }
    scene.pixel_labels = Tensor::full({h, w}, label);
    return scene;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path tmp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "rbfood_synthbench_test";
    std::filesystem::create_directories(dir);
    return dir;
}

Config small_config() {
    Config cfg = Config::defaults();
    cfg.set("bench.train_scenes", "3");
    cfg.set("bench.test_scenes", "3");
    return cfg;
}

}  // namespace

TEST_CASE("scene with zero shapes contains only background classes") {
    SceneParams params;
    params.shapes = {};
    const SyntheticScene scene = generate_scene(params, 7);
    REQUIRE(scene.image.shape == std::vector<int>{96, 96, 3});
    REQUIRE(scene.pixel_labels.shape == std::vector<int>{96, 96});
    CHECK(scene.instances.empty());
    bool saw[3] = {false, false, false};
    for (double v : scene.pixel_labels.data) {
        REQUIRE(is_background_class(static_cast<int>(v)));
        saw[static_cast<int>(v)] = true;
    }
    CHECK(saw[kClassGround]);
    CHECK(saw[kClassSky]);
    CHECK(saw[kClassWall]);
    for (double v : scene.image.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("scene generation is deterministic in the seed") {
    SceneParams params;
    params.shapes = {kClassSquare, kClassStar, kClassCircle};
    const SyntheticScene a = generate_scene(params, 123);
    const SyntheticScene b = generate_scene(params, 123);
    const SyntheticScene c = generate_scene(params, 124);
    CHECK(a.image.data == b.image.data);
    CHECK(a.pixel_labels.data == b.pixel_labels.data);
    REQUIRE(a.instances.size() == b.instances.size());
    for (std::size_t k = 0; k < a.instances.size(); ++k) {
        CHECK(a.instances[k].box.x == b.instances[k].box.x);
        CHECK(a.instances[k].mask.data == b.instances[k].mask.data);
    }
    CHECK(a.image.data != c.image.data);
}

TEST_CASE("requested shapes are recorded exactly") {
    SceneParams params;
    params.shapes = {kClassSquare, kClassSquare, kClassSquare};
    const SyntheticScene scene = generate_scene(params, 42);
    REQUIRE(scene.instances.size() == 3);
    for (const SceneInstance& inst : scene.instances) CHECK(inst.class_id == kClassSquare);
}

TEST_CASE("pixel labels replay instance masks with later instances occluding") {
    SceneParams params;
    params.shapes = {kClassSquare, kClassCircle, kClassTriangle, kClassCross};
    params.overlap_limit = 0.3;
    const SyntheticScene scene = generate_scene(params, 99);
    const int h = scene.pixel_labels.shape[0], w = scene.pixel_labels.shape[1];
    Tensor replay = Tensor::zeros({h, w});
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w; ++j)
            replay.data[static_cast<std::size_t>(i) * w + j] =
                scene.pixel_labels.data[static_cast<std::size_t>(i) * w + j];
    // wipe object pixels back to an impossible value, then repaint in order
    for (double& v : replay.data)
        if (v >= kClassSquare) v = -7;
    for (const SceneInstance& inst : scene.instances) {
        const int s = inst.mask.shape[0];
        CHECK(inst.box.w == s);
        CHECK(inst.box.h == s);
        CHECK(inst.box.x >= 0);
        CHECK(inst.box.y >= 0);
        CHECK(inst.box.x + inst.box.w <= w);
        CHECK(inst.box.y + inst.box.h <= h);
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                if (inst.mask.data[static_cast<std::size_t>(i) * s + j] != 0.0)
                    replay.data[(static_cast<std::size_t>(inst.box.y) + i) * w +
                                (static_cast<std::size_t>(inst.box.x) + j)] = inst.class_id;
    }
    CHECK(replay.data == scene.pixel_labels.data);
}

TEST_CASE("impossible placement is rejected with a diagnostic") {
    SceneParams params;
    params.height = 64;
    params.width = 64;
    params.min_size = 40;
    params.max_size = 40;
    params.overlap_limit = 0.0;
    params.shapes = {kClassSquare, kClassCircle};
    CHECK_THROWS_AS(generate_scene(params, 5), ValueError);
}

TEST_CASE("boundary extraction worked examples") {
    CHECK(extract_boundary_pixels(Tensor::full({28, 28}, kClassSky), 1).empty());
    CHECK(extract_boundary_pixels(Tensor::full({28, 28}, kClassSquare), 1).empty());

    Tensor split = Tensor::zeros({28, 28});
    for (int i = 0; i < 28; ++i)
        for (int j = 0; j < 14; ++j) split.data[static_cast<std::size_t>(i) * 28 + j] = kClassSquare;
    const auto band = extract_boundary_pixels(split, 1);
    REQUIRE(band.size() == 2 * 28);
    for (const auto& [r, c] : band) CHECK((c == 13 || c == 14));
    std::set<int> rows;
    for (const auto& [r, c] : band) rows.insert(r);
    CHECK(rows.size() == 28);

    CHECK(extract_boundary_pixels(split, 14).size() == 28 * 28);
    CHECK_THROWS_AS(extract_boundary_pixels(split, 0), ValueError);
    CHECK_THROWS_AS(extract_boundary_pixels(Tensor::zeros({3}), 1), ShapeError);

    // sentinel labels count as neither object nor background
    Tensor flags = Tensor::full({8, 8}, kClassGround);
    for (int j = 0; j < 8; ++j) flags.data[j] = kBoundaryLabel;
    for (int j = 0; j < 8; ++j) flags.data[8 + j] = kIgnoreLabel;
    CHECK(extract_boundary_pixels(flags, 2).empty());
}

TEST_CASE("boundary extraction matches the brute-force oracle") {
    Rng rng(2024);
    for (int iter = 0; iter < 200; ++iter) {
        const int h = rng.uniform_int(4, 16), w = rng.uniform_int(4, 16);
        Tensor m = Tensor::zeros({h, w});
        for (double& v : m.data) {
            const int pick = rng.uniform_int(0, 9);
            v = pick == 8 ? kIgnoreLabel : pick == 9 ? kBoundaryLabel : pick;
        }
        const int r = rng.uniform_int(1, 4);
        CHECK(extract_boundary_pixels(m, r) == boundary_oracle(m, r));
    }
}

TEST_CASE("auto-label worked examples") {
    std::vector<SceneInstance> instances(2);
    instances[0].box = {0, 0, 10, 10};
    instances[0].class_id = kClassCircle;
    instances[1].box = {30, 30, 10, 10};
    instances[1].class_id = kClassTriangle;

    CHECK(auto_label({0, 0, 10, 10}, instances, 0.5) == kClassCircle);
    CHECK(auto_label({50, 50, 8, 8}, instances, 0.5) == kGtBackground);
    // intersection 50, union 150: IoU 1/3 below the 0.5 bar
    CHECK(auto_label({5, 0, 10, 10}, instances, 0.5) == kGtBackground);
    CHECK(auto_label({5, 0, 10, 10}, instances, 0.3) == kClassCircle);
    // the max-IoU instance wins
    CHECK(auto_label({29, 29, 10, 10}, instances, 0.5) == kClassTriangle);
    CHECK_THROWS_AS(auto_label({0, 0, 1, 1}, instances, 0.0), ValueError);
    CHECK_THROWS_AS(auto_label({0, 0, 1, 1}, instances, 1.0), ValueError);
}

TEST_CASE("constant-region proposal crops are constant with coordinate corners") {
    const SyntheticScene scene = flat_scene(40, 40, 0.3, 0.6, 0.9, kClassSky);
    const Proposal p = render_proposal(scene, {5, 5, 12, 12}, FeatureRecipe::kAppearance);
    REQUIRE(p.features.shape == std::vector<int>{14, 14, 5});
    REQUIRE(p.labels28.shape == std::vector<int>{28, 28});
    for (int i = 0; i < 14; ++i) {
        for (int j = 0; j < 14; ++j) {
            const std::size_t at = (static_cast<std::size_t>(i) * 14 + j) * 5;
            CHECK(p.features.data[at + 0] == doctest::Approx(0.3));
            CHECK(p.features.data[at + 1] == doctest::Approx(0.6));
            CHECK(p.features.data[at + 2] == doctest::Approx(0.9));
        }
    }
    auto coord = [&](int i, int j, int c) {
        return p.features.data[(static_cast<std::size_t>(i) * 14 + j) * 5 + 3 + c];
    };
    CHECK(coord(0, 0, 0) == 0.0);
    CHECK(coord(0, 0, 1) == 0.0);
    CHECK(coord(0, 13, 0) == 1.0);
    CHECK(coord(0, 13, 1) == 0.0);
    CHECK(coord(13, 0, 0) == 0.0);
    CHECK(coord(13, 0, 1) == 1.0);
    CHECK(coord(13, 13, 0) == 1.0);
    CHECK(coord(13, 13, 1) == 1.0);
    for (double v : p.labels28.data) CHECK(v == kClassSky);
    CHECK(p.gt_class == kGtBackground);

    const Proposal q = render_proposal(scene, {5, 5, 12, 12}, FeatureRecipe::kContext);
    REQUIRE(q.features.shape == std::vector<int>{14, 14, 8});
    for (int i = 0; i < 14 * 14; ++i) {
        CHECK(q.features.data[static_cast<std::size_t>(i) * 8 + 5] == doctest::Approx(0.3));
        CHECK(q.features.data[static_cast<std::size_t>(i) * 8 + 6] == doctest::Approx(0.6));
        CHECK(q.features.data[static_cast<std::size_t>(i) * 8 + 7] == doctest::Approx(0.9));
    }
}

TEST_CASE("proposal boxes must be inside the image with positive area") {
    const SyntheticScene scene = flat_scene(40, 40, 0.5, 0.5, 0.5, kClassGround);
    CHECK_THROWS_AS(render_proposal(scene, {5, 5, 0, 10}, FeatureRecipe::kAppearance), ValueError);
    CHECK_THROWS_AS(render_proposal(scene, {-1, 5, 10, 10}, FeatureRecipe::kAppearance), ValueError);
    CHECK_THROWS_AS(render_proposal(scene, {35, 5, 10, 10}, FeatureRecipe::kAppearance), ValueError);
}

TEST_CASE("half-object crop gets a boundary band matching the neighborhood scan") {
    SyntheticScene scene = flat_scene(28, 28, 0.5, 0.5, 0.5, kClassGround);
    for (int i = 0; i < 28; ++i)
        for (int j = 0; j < 14; ++j)
            scene.pixel_labels.data[static_cast<std::size_t>(i) * 28 + j] = kClassSquare;
    const Proposal p = render_proposal(scene, {0, 0, 28, 28}, FeatureRecipe::kAppearance, 1);
    for (int i = 0; i < 28; ++i) {
        for (int j = 0; j < 28; ++j) {
            const double v = p.labels28.data[static_cast<std::size_t>(i) * 28 + j];
            if (j == 13 || j == 14)
                CHECK(v == kBoundaryLabel);
            else
                CHECK(v == (j < 13 ? kClassSquare : kClassGround));
        }
    }
    // the flagged set equals the oracle band on the resampled id map
    Tensor ids = Tensor::zeros({28, 28});
    for (int i = 0; i < 28; ++i)
        for (int j = 0; j < 28; ++j)
            ids.data[static_cast<std::size_t>(i) * 28 + j] = j < 14 ? kClassSquare : kClassGround;
    const auto oracle = boundary_oracle(ids, 1);
    std::vector<std::pair<int, int>> flagged;
    for (int i = 0; i < 28; ++i)
        for (int j = 0; j < 28; ++j)
            if (p.labels28.data[static_cast<std::size_t>(i) * 28 + j] == kBoundaryLabel)
                flagged.emplace_back(i, j);
    CHECK(flagged == oracle);
}

TEST_CASE("cells straddling a background-background seam become ignore") {
    SyntheticScene scene = flat_scene(31, 31, 0.5, 0.5, 0.5, kClassSky);
    for (int i = 15; i < 31; ++i)
        for (int j = 0; j < 31; ++j)
            scene.pixel_labels.data[static_cast<std::size_t>(i) * 31 + j] = kClassWall;
    const Proposal p = render_proposal(scene, {0, 0, 31, 31}, FeatureRecipe::kAppearance);
    int ignored = 0;
    for (int i = 0; i < 28; ++i)
        for (int j = 0; j < 28; ++j) {
            const double v = p.labels28.data[static_cast<std::size_t>(i) * 28 + j];
            CHECK(v != kBoundaryLabel);
            ignored += v == kIgnoreLabel;
        }
    // the seam row resamples ambiguously; no object pixels, so never boundary
    CHECK(ignored >= 28);
    CHECK(ignored <= 2 * 28);
}

TEST_CASE("proposal auto-label flows through rendering") {
    SceneParams params;
    params.shapes = {kClassCircle};
    const SyntheticScene scene = generate_scene(params, 11);
    REQUIRE(scene.instances.size() == 1);
    const Proposal p =
        render_proposal(scene, scene.instances[0].box, FeatureRecipe::kContext, 1, 0.5);
    CHECK(p.gt_class == kClassCircle);
}

TEST_CASE("generated dataset has clean splits, sequential ids, and valid labels") {
    const Config cfg = small_config();
    const SceneDataset ds = generate_dataset(cfg, 31337);
    REQUIRE(ds.scenes.size() == 6);
    REQUIRE(ds.recipe == "context");
    REQUIRE(ds.feature_dim == 8);
    for (std::size_t s = 0; s < ds.scenes.size(); ++s)
        CHECK(ds.scenes[s].id == static_cast<int>(s));
    for (std::size_t k = 0; k < ds.proposals.size(); ++k)
        CHECK(ds.proposals[k].id == static_cast<int>(k));
    CHECK(!ds.proposals.empty());

    // train scenes carry no unknown instances or pixels at all
    for (int s = 0; s < 3; ++s) {
        for (const SceneInstance& inst : ds.scenes[static_cast<std::size_t>(s)].instances)
            CHECK(!is_unknown_class(inst.class_id));
        for (double v : ds.scenes[static_cast<std::size_t>(s)].pixel_labels.data)
            CHECK(!is_unknown_class(static_cast<int>(v)));
    }

    int split_counts[3] = {0, 0, 0};
    for (const Proposal& p : ds.proposals) {
        REQUIRE(p.scene_id >= 0);
        REQUIRE(p.scene_id < 6);
        const SyntheticScene& scene = ds.scenes[static_cast<std::size_t>(p.scene_id)];
        const bool test_scene = p.scene_id >= 3;
        ++split_counts[p.split];
        if (!test_scene) {
            CHECK(p.split == kSplitTrain);
            for (double v : p.labels28.data) CHECK(!is_unknown_class(static_cast<int>(v)));
        } else {
            bool hits_unknown = false;
            for (const SceneInstance& inst : scene.instances)
                hits_unknown = hits_unknown || (is_unknown_class(inst.class_id) &&
                                                intersection_area(p.box, inst.box) > 0.0);
            CHECK(p.split == (hits_unknown ? kSplitTestOod : kSplitTestKnown));
        }
        CHECK(p.gt_class == auto_label(p.box, scene.instances, cfg.num("bench.iou_threshold")));
        REQUIRE(p.features.shape == std::vector<int>{14, 14, 8});
        CHECK(p.features.all_finite());
        for (double v : p.labels28.data)
            CHECK((v == kIgnoreLabel || v == kBoundaryLabel ||
                   (v >= 0 && v < kNumClasses && v == std::floor(v))));
    }
    CHECK(split_counts[kSplitTrain] > 0);
    CHECK(split_counts[kSplitTestKnown] > 0);
    CHECK(split_counts[kSplitTestOod] > 0);
}

TEST_CASE("dataset files round-trip and regenerate byte-identically") {
    const auto dir = tmp_dir();
    const auto file_a = dir / "a.bin", file_b = dir / "b.bin", file_c = dir / "c.bin";
    const Config cfg = small_config();
    const SceneDataset ds = generate_dataset(cfg, 555);
    save_dataset(file_a.string(), ds);
    save_dataset(file_b.string(), generate_dataset(cfg, 555));
    CHECK(slurp(file_a) == slurp(file_b));

    const SceneDataset back = load_dataset(file_a.string());
    CHECK(back.recipe == ds.recipe);
    CHECK(back.feature_dim == ds.feature_dim);
    REQUIRE(back.scenes.size() == ds.scenes.size());
    REQUIRE(back.proposals.size() == ds.proposals.size());
    for (std::size_t s = 0; s < ds.scenes.size(); ++s) {
        CHECK(back.scenes[s].id == ds.scenes[s].id);
        CHECK(back.scenes[s].image.data == ds.scenes[s].image.data);
        CHECK(back.scenes[s].pixel_labels.data == ds.scenes[s].pixel_labels.data);
        REQUIRE(back.scenes[s].instances.size() == ds.scenes[s].instances.size());
        for (std::size_t k = 0; k < ds.scenes[s].instances.size(); ++k) {
            CHECK(back.scenes[s].instances[k].class_id == ds.scenes[s].instances[k].class_id);
            CHECK(back.scenes[s].instances[k].box.x == ds.scenes[s].instances[k].box.x);
            CHECK(back.scenes[s].instances[k].mask.data == ds.scenes[s].instances[k].mask.data);
        }
    }
    for (std::size_t k = 0; k < ds.proposals.size(); ++k) {
        CHECK(back.proposals[k].scene_id == ds.proposals[k].scene_id);
        CHECK(back.proposals[k].id == ds.proposals[k].id);
        CHECK(back.proposals[k].split == ds.proposals[k].split);
        CHECK(back.proposals[k].gt_class == ds.proposals[k].gt_class);
        CHECK(back.proposals[k].box.x == ds.proposals[k].box.x);
        CHECK(back.proposals[k].box.w == ds.proposals[k].box.w);
        CHECK(back.proposals[k].features.data == ds.proposals[k].features.data);
        CHECK(back.proposals[k].labels28.data == ds.proposals[k].labels28.data);
    }
    save_dataset(file_c.string(), back);
    CHECK(slurp(file_a) == slurp(file_c));
}

TEST_CASE("corrupt dataset files are rejected") {
    const auto dir = tmp_dir();
    const auto good = dir / "good.bin", bad = dir / "bad.bin";
    Config cfg = small_config();
    cfg.set("bench.train_scenes", "1");
    cfg.set("bench.test_scenes", "1");
    save_dataset(good.string(), generate_dataset(cfg, 9));

    CHECK_THROWS_AS(load_dataset((dir / "missing.bin").string()), IoError);
    {
        std::ofstream out(bad, std::ios::binary);
        out << "RBFOOD-DATA 2\n";
    }
    CHECK_THROWS_AS(load_dataset(bad.string()), IoError);
    const std::string full = slurp(good);
    {
        std::ofstream out(bad, std::ios::binary);
        out.write(full.data(), static_cast<std::streamsize>(full.size() / 2));
    }
    CHECK_THROWS_AS(load_dataset(bad.string()), IoError);
}

TEST_CASE("dataset index lists every proposal with readable names") {
    const auto dir = tmp_dir();
    const auto path = dir / "index.csv";
    Config cfg = small_config();
    cfg.set("bench.train_scenes", "2");
    cfg.set("bench.test_scenes", "2");
    const SceneDataset ds = generate_dataset(cfg, 77);
    write_dataset_index(path.string(), ds);

    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "scene,proposal,split,gt_class");
    std::size_t rows = 0;
    const std::set<std::string> splits = {"train", "test_known", "test_ood"};
    while (std::getline(in, line)) {
        std::istringstream row(line);
        std::string scene, proposal, split, gt;
        REQUIRE(std::getline(row, scene, ','));
        REQUIRE(std::getline(row, proposal, ','));
        REQUIRE(std::getline(row, split, ','));
        REQUIRE(std::getline(row, gt, ','));
        CHECK(std::stoi(scene) == ds.proposals[rows].scene_id);
        CHECK(std::stoi(proposal) == ds.proposals[rows].id);
        CHECK(splits.count(split) == 1);
        CHECK(gt == class_name(ds.proposals[rows].gt_class));
        ++rows;
    }
    CHECK(rows == ds.proposals.size());
}
