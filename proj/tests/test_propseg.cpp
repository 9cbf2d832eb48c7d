#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "rbfood/errors.hpp"
#include "rbfood/objective.hpp"
#include "rbfood/propseg.hpp"
#include "rbfood/rng.hpp"

using namespace rbfood;

namespace {

Config small_seg_config() {
    Config cfg = Config::defaults();
    cfg.set("bench.feature_recipe", "appearance");
    cfg.set("seg.conv_layers", "2");
    cfg.set("seg.conv_width", "8");
    cfg.set("seg.feature_dim", "8");
    cfg.set("seg.centers", "2");
    cfg.set("seg.epochs", "3");
    cfg.set("train.batch", "8");
    cfg.set("head.sigma", "3.0");
    cfg.set("train.lr", "0.05");
    cfg.set("train.ema", "0.8");
    cfg.set("train.lr_decay_period", "100");
    return cfg;
}

// Every pixel labeled `cls`, channels keyed to the class with light noise.
Proposal uniform_proposal(int cls, int channels, Rng& rng) {
    Proposal p;
    p.features = Tensor::zeros({14, 14, channels});
    p.labels28 = Tensor::zeros({28, 28});
    for (std::size_t i = 0; i < p.features.data.size(); ++i) {
        const int k = static_cast<int>(i) % channels;
        p.features.data[i] = 0.5 * std::sin(0.9 * cls + 1.7 * k) + 0.05 * rng.normal();
    }
    for (double& v : p.labels28.data) v = cls;
    return p;
}

std::vector<Proposal> uniform_set(int reps, int channels, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Proposal> props;
    for (int rep = 0; rep < reps; ++rep)
        for (int c = 0; c < 6; ++c) props.push_back(uniform_proposal(c, channels, rng));
    return props;
}

Tensor random_features(int channels, std::uint64_t seed) {
    Tensor t = Tensor::zeros({14, 14, channels});
    Rng rng(seed);
    for (double& v : t.data) v = rng.normal();
    return t;
}

std::vector<double> model_params(const PropSegModel& model) {
    std::vector<double> out;
    for (const LayerStack* s : {&model.stack, &model.linear_head})
        for (const Layer& l : s->layers) {
            out.insert(out.end(), l.weight.data.begin(), l.weight.data.end());
            out.insert(out.end(), l.bias.data.begin(), l.bias.data.end());
        }
    out.insert(out.end(), model.head.centers.data.begin(), model.head.centers.data.end());
    out.insert(out.end(), model.head.weight_logits.data.begin(),
               model.head.weight_logits.data.end());
    return out;
}

const std::vector<int> kAllSix{0, 1, 2, 3, 4, 5};

}  // namespace

TEST_CASE("head and regularizer names parse both ways") {
    CHECK(parse_seg_head("rbf") == SegHead::kRbf);
    CHECK(parse_seg_head("dropout") == SegHead::kDropout);
    CHECK(parse_seg_head("entropy") == SegHead::kEntropy);
    CHECK(parse_seg_regularizer("none") == SegRegularizer::kNone);
    CHECK(parse_seg_regularizer("gp") == SegRegularizer::kGp);
    CHECK(parse_seg_regularizer("boundary") == SegRegularizer::kBoundary);
    for (SegHead h : {SegHead::kRbf, SegHead::kDropout, SegHead::kEntropy})
        CHECK(parse_seg_head(seg_head_name(h)) == h);
    CHECK_THROWS_AS(parse_seg_head("softmax"), ConfigError);
    CHECK_THROWS_AS(parse_seg_regularizer("l2"), ConfigError);
}

TEST_CASE("model construction follows the configured layout") {
    Config cfg = Config::defaults();
    PropSegModel model = build_propseg_model(cfg, 1);
    REQUIRE(model.stack.layers.size() == 11);  // 4x(conv,relu), deconv, relu, project
    for (int i = 0; i < 8; i += 2) {
        CHECK(model.stack.layers[static_cast<std::size_t>(i)].kind == LayerKind::Conv3x3);
        CHECK(model.stack.layers[static_cast<std::size_t>(i + 1)].kind == LayerKind::Relu);
    }
    CHECK(model.stack.layers[8].kind == LayerKind::Deconv2x);
    CHECK(model.stack.layers[10].kind == LayerKind::Dense);
    CHECK(model.input_channels == 8);  // context recipe
    CHECK(model.trained_classes == kAllSix);
    CHECK(model.head.num_classes == 6);
    CHECK(model.head.num_centers == 16);
    CHECK(model.head.feature_dim == 32);
    CHECK(model.head.sigma == doctest::Approx(0.1));

    cfg.set("bench.feature_recipe", "appearance");
    cfg.set("seg.bg_only", "true");
    cfg.set("seg.conv_layers", "0");
    PropSegModel tiny = build_propseg_model(cfg, 1);
    CHECK(tiny.stack.layers.empty());
    CHECK(tiny.input_channels == 5);
    CHECK(tiny.trained_classes == std::vector<int>{0, 1, 2});
    CHECK(tiny.head.feature_dim == 5);  // head reads raw channels

    PropSegModel a = build_propseg_model(cfg, 9);
    PropSegModel b = build_propseg_model(cfg, 9);
    CHECK(model_params(a) == model_params(b));

    Config bad = Config::defaults();
    bad.set("seg.head", "entropy");
    bad.set("seg.regularizer", "gp");
    CHECK_THROWS_AS(build_propseg_model(bad, 1), ConfigError);
    bad.set("seg.head", "dropout");
    bad.set("seg.regularizer", "boundary");
    CHECK_THROWS_AS(build_propseg_model(bad, 1), ConfigError);
}

TEST_CASE("nearest upsampling duplicates each cell into a 2x2 block") {
    Tensor src({1, 2, 2, 1}, {1.0, 2.0, 3.0, 4.0});
    Tensor up = upsample2x_nearest(src);
    REQUIRE(up.shape == std::vector<int>{1, 4, 4, 1});
    const std::vector<double> want{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
    CHECK(up.data == want);
    CHECK_THROWS_AS(upsample2x_nearest(Tensor({2, 2}, {1, 2, 3, 4})), ShapeError);
}

TEST_CASE("proposal scoring emits valid maps for every head") {
    for (const char* head : {"rbf", "dropout", "entropy"}) {
        Config cfg = small_seg_config();
        cfg.set("seg.head", head);
        const PropSegModel model = build_propseg_model(cfg, 4);
        const Tensor x = random_features(5, 21);
        const SegOutput out = segment_proposal(model, x, 5);
        REQUIRE(out.class_map.shape == std::vector<int>{28, 28});
        REQUIRE(out.u_seg.shape == std::vector<int>{28, 28});
        REQUIRE(out.h_maps.shape == std::vector<int>{28, 28, 6});
        for (double v : out.u_seg.data) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        for (double v : out.class_map.data) CHECK((v >= 0 && v <= 5));
        const SegOutput again = segment_proposal(model, x, 5);
        CHECK(out.u_seg.data == again.u_seg.data);
        CHECK(out.h_maps.data == again.h_maps.data);
    }

    Config cfg = small_seg_config();
    const PropSegModel model = build_propseg_model(cfg, 4);
    const Tensor x = random_features(5, 22);
    const SegOutput out = segment_proposal(model, x);
    for (int p = 0; p < 28 * 28; ++p) {
        double best = 0.0;
        for (int c = 0; c < 6; ++c)
            best = std::max(best, out.h_maps.data[static_cast<std::size_t>(p * 6 + c)]);
        CHECK(out.u_seg.data[static_cast<std::size_t>(p)] == 1.0 - best);
    }
    CHECK_THROWS_AS(segment_proposal(model, Tensor::zeros({14, 14, 3})), ShapeError);

    cfg.set("seg.head", "dropout");
    const PropSegModel mc = build_propseg_model(cfg, 4);
    const SegOutput s5 = segment_proposal(mc, x, 5);
    const SegOutput s5b = segment_proposal(mc, x, 5);
    const SegOutput s6 = segment_proposal(mc, x, 6);
    CHECK(s5.u_seg.data == s5b.u_seg.data);
    CHECK(s5.u_seg.data != s6.u_seg.data);
}

TEST_CASE("single-pass dropout with rate zero degenerates to the entropy head") {
    Config cfg = small_seg_config();
    cfg.set("seg.head", "entropy");
    const PropSegModel ent = build_propseg_model(cfg, 8);
    cfg.set("seg.head", "dropout");
    cfg.set("seg.dropout_p", "0");
    cfg.set("seg.dropout_passes", "1");
    const PropSegModel mc = build_propseg_model(cfg, 8);
    const Tensor x = random_features(5, 30);
    const SegOutput a = segment_proposal(ent, x);
    const SegOutput b = segment_proposal(mc, x, 99);
    CHECK(a.h_maps.data == b.h_maps.data);
    CHECK(a.u_seg.data == b.u_seg.data);
    CHECK(a.class_map.data == b.class_map.data);
}

TEST_CASE("object mask thresholds confident background away") {
    SegOutput seg;
    seg.h_maps = Tensor::zeros({28, 28, 6});
    for (int p = 0; p < 28 * 28; ++p) seg.h_maps.data[static_cast<std::size_t>(p * 6)] = 1.0;
    Tensor empty_mask = binary_object_mask(seg, kAllSix, 0.5);
    for (double v : empty_mask.data) CHECK(v == 0.0);

    for (double& v : seg.h_maps.data) v = 0.0;
    for (int p = 0; p < 28 * 28; ++p) seg.h_maps.data[static_cast<std::size_t>(p * 6 + 3)] = 1.0;
    Tensor full_mask = binary_object_mask(seg, kAllSix, 0.5);
    for (double v : full_mask.data) CHECK(v == 1.0);

    CHECK_THROWS_AS(binary_object_mask(seg, kAllSix, 0.0), ValueError);
    CHECK_THROWS_AS(binary_object_mask(seg, kAllSix, 1.0), ValueError);
    CHECK_THROWS_AS(binary_object_mask(seg, std::vector<int>{0, 1, 2}, 0.5), ShapeError);
}

TEST_CASE("object mask agrees with the per-pixel rule and shrinks as theta_bg grows") {
    Rng rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        SegOutput seg;
        seg.h_maps = Tensor::zeros({28, 28, 6});
        for (double& v : seg.h_maps.data) v = rng.uniform01();
        const double lo = rng.uniform(0.05, 0.5);
        const double hi = rng.uniform(lo, 0.95);
        const Tensor mask_lo = binary_object_mask(seg, kAllSix, lo);
        const Tensor mask_hi = binary_object_mask(seg, kAllSix, hi);
        for (int p = 0; p < 28 * 28; ++p) {
            double best_bg = 0.0;
            for (int c = 0; c < 3; ++c)
                best_bg = std::max(best_bg, seg.h_maps.data[static_cast<std::size_t>(p * 6 + c)]);
            const double want = best_bg > 1.0 - lo ? 0.0 : 1.0;
            CHECK(mask_lo.data[static_cast<std::size_t>(p)] == want);
            if (mask_hi.data[static_cast<std::size_t>(p)] == 1.0)
                CHECK(mask_lo.data[static_cast<std::size_t>(p)] == 1.0);
        }
    }
}

TEST_CASE("training validates its inputs and is reproducible") {
    Config cfg = small_seg_config();
    std::vector<Proposal> props = uniform_set(2, 5, 11);

    PropSegModel frozen = build_propseg_model(cfg, 3);
    const std::vector<double> before = model_params(frozen);
    Config zero = cfg;
    zero.set("seg.epochs", "0");
    train_propseg(frozen, props, zero, 7);
    CHECK(model_params(frozen) == before);

    PropSegModel a = build_propseg_model(cfg, 3);
    PropSegModel b = build_propseg_model(cfg, 3);
    PropSegModel c = build_propseg_model(cfg, 3);
    train_propseg(a, props, cfg, 7);
    train_propseg(b, props, cfg, 7);
    train_propseg(c, props, cfg, 8);
    CHECK(model_params(a) == model_params(b));
    CHECK(model_params(a) != model_params(c));

    PropSegModel fresh = build_propseg_model(cfg, 3);
    CHECK_THROWS_AS(train_propseg(fresh, {}, cfg, 7), ValueError);

    std::vector<Proposal> bad_shape = props;
    bad_shape[0].features = Tensor::zeros({14, 14, 7});
    CHECK_THROWS_AS(train_propseg(fresh, bad_shape, cfg, 7), ShapeError);

    std::vector<Proposal> leaked = props;
    leaked[2].labels28.data[40] = 6.0;
    CHECK_THROWS_AS(train_propseg(fresh, leaked, cfg, 7), ValueError);
}

TEST_CASE("background-only policy never trains on object pixels") {
    Config cfg = small_seg_config();
    cfg.set("seg.bg_only", "true");
    std::vector<Proposal> object_only;
    Rng rng(13);
    for (int c = 3; c < 6; ++c) object_only.push_back(uniform_proposal(c, 5, rng));
    PropSegModel model = build_propseg_model(cfg, 3);
    const std::vector<double> before = model_params(model);
    const auto log = train_propseg(model, object_only, cfg, 7);
    for (const SegEpochLog& e : log) {
        CHECK(e.l_in == 0.0);
        CHECK(e.pixel_acc == 0.0);
    }
    CHECK(model_params(model) == before);
}

TEST_CASE("boundary pixels reach the boundary loss only under that regularizer") {
    std::vector<Proposal> props = uniform_set(2, 5, 11);
    for (Proposal& p : props)
        for (int j = 0; j < 28; ++j)
            p.labels28.data[static_cast<std::size_t>(14 * 28 + j)] = kBoundaryLabel;

    Config cfg = small_seg_config();
    cfg.set("seg.epochs", "1");
    PropSegModel plain = build_propseg_model(cfg, 3);
    const auto quiet = train_propseg(plain, props, cfg, 7);
    CHECK(quiet[0].l_bd == 0.0);

    cfg.set("seg.regularizer", "boundary");
    PropSegModel constrained = build_propseg_model(cfg, 3);
    const auto loud = train_propseg(constrained, props, cfg, 7);
    CHECK(loud[0].l_bd > 0.0);
}

TEST_CASE("center updates touch only the classes present in the batch") {
    Config cfg = small_seg_config();
    cfg.set("seg.epochs", "1");
    Rng rng(19);
    std::vector<Proposal> only_ground{uniform_proposal(0, 5, rng)};
    PropSegModel model = build_propseg_model(cfg, 3);
    const Tensor centers_before = model.head.centers;
    train_propseg(model, only_ground, cfg, 7);
    const int k = model.head.num_centers, d = model.head.feature_dim;
    bool class0_moved = false;
    for (int i = 0; i < k * d; ++i)
        if (model.head.centers.data[static_cast<std::size_t>(i)] !=
            centers_before.data[static_cast<std::size_t>(i)])
            class0_moved = true;
    CHECK(class0_moved);
    for (int c = 1; c < 6; ++c)
        for (int i = 0; i < k * d; ++i)
            CHECK(model.head.centers.data[static_cast<std::size_t>((c * k * d) + i)] ==
                  centers_before.data[static_cast<std::size_t>((c * k * d) + i)]);
}

TEST_CASE("the uniform-class exercise is learnable at desk scale") {
    Config cfg = small_seg_config();
    cfg.set("seg.epochs", "20");
    std::vector<Proposal> props = uniform_set(4, 5, 11);
    PropSegModel model = build_propseg_model(cfg, 3);
    const auto log = train_propseg(model, props, cfg, 7);
    CHECK(log.back().pixel_acc >= 0.7);
    CHECK(log.back().l_in < log.front().l_in);
}

TEST_CASE("gradient-penalty training runs and surfaces divergence cleanly") {
    Config cfg = small_seg_config();
    cfg.set("seg.regularizer", "gp");
    cfg.set("seg.epochs", "1");
    std::vector<Proposal> props = uniform_set(1, 5, 11);
    PropSegModel model = build_propseg_model(cfg, 3);
    const auto log = train_propseg(model, props, cfg, 7);
    CHECK(log[0].l_reg != 0.0);
    CHECK(std::isfinite(log[0].l_reg));

    cfg.set("train.lr", "1e300");
    cfg.set("seg.epochs", "4");
    PropSegModel doomed = build_propseg_model(cfg, 3);
    CHECK_THROWS_AS(train_propseg(doomed, props, cfg, 7), TrainingDiverged);
}

TEST_CASE("checkpoints restore the exact trained function") {
    Config cfg = small_seg_config();
    cfg.set("seg.epochs", "2");
    std::vector<Proposal> props = uniform_set(2, 5, 11);
    PropSegModel trained = build_propseg_model(cfg, 3);
    train_propseg(trained, props, cfg, 7);

    const Checkpoint ck = propseg_checkpoint(trained);
    const std::string path = "seg_ck_roundtrip.bin";
    save_checkpoint(path, ck);
    const Checkpoint loaded = load_checkpoint(path);

    PropSegModel fresh = build_propseg_model(cfg, 3);
    restore_propseg(fresh, loaded);
    const Tensor x = random_features(5, 55);
    const SegOutput want = segment_proposal(trained, x);
    const SegOutput got = segment_proposal(fresh, x);
    CHECK(want.h_maps.data == got.h_maps.data);
    CHECK(want.u_seg.data == got.u_seg.data);

    Config other = cfg;
    other.set("seg.head", "entropy");
    PropSegModel mismatched = build_propseg_model(other, 3);
    CHECK_THROWS_AS(restore_propseg(mismatched, loaded), IoError);

    Checkpoint truncated = ck;
    truncated.tensors.pop_back();
    PropSegModel victim = build_propseg_model(cfg, 3);
    CHECK_THROWS_AS(restore_propseg(victim, truncated), IoError);
    std::remove(path.c_str());
}
