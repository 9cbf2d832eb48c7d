#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "rbfood/errors.hpp"
#include "rbfood/rng.hpp"
#include "rbfood/toy2d.hpp"

using namespace rbfood;

namespace {

Config small_toy_config() {
    Config cfg = Config::defaults();
    cfg.set("toy.hidden", "16");
    cfg.set("toy.feature_dim", "8");
    cfg.set("toy.centers", "4");
    cfg.set("toy.epochs", "15");
    cfg.set("toy.boundary_count", "40");
    cfg.set("train.batch", "32");
    cfg.set("toy.sigma", "2.0");
    return cfg;
}

ToyDataset small_data(std::uint64_t seed) {
    ToyParams p;
    p.n_per_class = 60;
    p.n_ood = 80;
    return generate_toy_data(p, seed);
}

std::vector<double> all_params(const ToyModel& model) {
    std::vector<double> out;
    for (const Layer& l : model.stack.layers) {
        out.insert(out.end(), l.weight.data.begin(), l.weight.data.end());
        out.insert(out.end(), l.bias.data.begin(), l.bias.data.end());
    }
    out.insert(out.end(), model.head.centers.data.begin(), model.head.centers.data.end());
    out.insert(out.end(), model.head.weight_logits.data.begin(),
               model.head.weight_logits.data.end());
    return out;
}

}  // namespace

TEST_CASE("toy data generation is deterministic and shaped as declared") {
    ToyParams p;
    p.n_per_class = 50;
    p.n_ood = 70;
    const ToyDataset a = generate_toy_data(p, 5);
    const ToyDataset b = generate_toy_data(p, 5);
    const ToyDataset c = generate_toy_data(p, 6);
    REQUIRE(a.in_points.shape == std::vector<int>{100, 2});
    REQUIRE(a.ood_points.shape == std::vector<int>{70, 2});
    REQUIRE(a.in_labels.size() == 100);
    CHECK(a.in_points.data == b.in_points.data);
    CHECK(a.ood_points.data == b.ood_points.data);
    CHECK(a.in_points.data != c.in_points.data);
    for (int i = 0; i < 50; ++i) CHECK(a.in_labels[static_cast<std::size_t>(i)] == 0);
    for (int i = 50; i < 100; ++i) CHECK(a.in_labels[static_cast<std::size_t>(i)] == 1);
    for (double v : a.ood_points.data) {
        CHECK(v >= -p.ood_halfwidth);
        CHECK(v <= p.ood_halfwidth);
    }
}

TEST_CASE("empty toy dataset and rejected parameters") {
    ToyParams p;
    p.n_per_class = 0;
    p.n_ood = 0;
    const ToyDataset empty = generate_toy_data(p, 1);
    CHECK(empty.in_points.shape == std::vector<int>{0, 2});
    CHECK(empty.ood_points.shape == std::vector<int>{0, 2});
    CHECK(empty.in_labels.empty());

    ToyParams bad = p;
    bad.cov_scale = 0.0;
    CHECK_THROWS_AS(generate_toy_data(bad, 1), ValueError);
    bad.cov_scale = -0.1;
    CHECK_THROWS_AS(generate_toy_data(bad, 1), ValueError);
    ToyParams neg;
    neg.n_per_class = -1;
    CHECK_THROWS_AS(generate_toy_data(neg, 1), ValueError);
}

TEST_CASE("large blob sample mean lands on the configured mean") {
    ToyParams p;
    p.n_per_class = 100000;
    p.n_ood = 0;
    const ToyDataset data = generate_toy_data(p, 99);
    double mx = 0.0, my = 0.0;
    for (int i = p.n_per_class; i < 2 * p.n_per_class; ++i) {
        mx += data.in_points.data[static_cast<std::size_t>(i) * 2 + 0];
        my += data.in_points.data[static_cast<std::size_t>(i) * 2 + 1];
    }
    mx /= p.n_per_class;
    my /= p.n_per_class;
    CHECK(std::abs(mx - 2.0) < 0.02);
    CHECK(std::abs(my - 0.0) < 0.02);
}

TEST_CASE("boundary points are jittered inter-class midpoints") {
    const Tensor pair({2, 2}, {0.0, 0.0, 2.0, 0.0});
    const std::vector<int> labels = {0, 1};
    const Tensor mids = sample_boundary_points(pair, labels, 5, 0.0, 3);
    REQUIRE(mids.shape == std::vector<int>{5, 2});
    for (int k = 0; k < 5; ++k) {
        CHECK(mids.data[static_cast<std::size_t>(k) * 2 + 0] == doctest::Approx(1.0));
        CHECK(mids.data[static_cast<std::size_t>(k) * 2 + 1] == doctest::Approx(0.0));
    }

    CHECK(sample_boundary_points(pair, labels, 0, 0.1, 3).shape == std::vector<int>{0, 2});
    const std::vector<int> one_class = {0, 0};
    CHECK_THROWS_AS(sample_boundary_points(pair, one_class, 4, 0.1, 3), ValueError);
}

TEST_CASE("boundary points stay within the blob-separation envelope") {
    const ToyDataset data = small_data(17);
    const Tensor pts = sample_boundary_points(data.in_points, data.in_labels, 200, 0.1, 4);
    const double mean_gap = 4.0;  // blob means at (-2,0) and (2,0)
    for (int k = 0; k < 200; ++k) {
        double best = 1e300;
        for (int i = 0; i < data.in_points.shape[0]; ++i) {
            const double dx = pts.data[static_cast<std::size_t>(k) * 2] -
                              data.in_points.data[static_cast<std::size_t>(i) * 2];
            const double dy = pts.data[static_cast<std::size_t>(k) * 2 + 1] -
                              data.in_points.data[static_cast<std::size_t>(i) * 2 + 1];
            best = std::min(best, std::sqrt(dx * dx + dy * dy));
        }
        CHECK(best <= mean_gap);
    }
}

TEST_CASE("variant names round-trip and stacks match their flags") {
    for (ToyVariant v : all_toy_variants()) CHECK(parse_toy_variant(toy_variant_name(v)) == v);
    CHECK_THROWS_AS(parse_toy_variant("banana"), ConfigError);

    Config cfg = small_toy_config();
    cfg.set("toy.epochs", "0");
    const ToyDataset data = small_data(8);
    for (ToyVariant v : all_toy_variants()) {
        const ToyTrainResult r = train_toy_variant(data.in_points, data.in_labels, v, cfg, 12);
        CHECK(r.model.variant == v);
        CHECK(r.log.empty());
        int bn_layers = 0, sn_layers = 0, dense_layers = 0;
        for (const Layer& l : r.model.stack.layers) {
            bn_layers += l.kind == LayerKind::BatchNorm;
            dense_layers += l.kind == LayerKind::Dense;
            sn_layers += l.spectral_norm;
        }
        CHECK(dense_layers == 3);
        CHECK(bn_layers == (v == ToyVariant::kBn || v == ToyVariant::kBnGp ? 2 : 0));
        CHECK(sn_layers == (v == ToyVariant::kSpectral ? 3 : 0));
        CHECK(r.model.head.num_classes == 2);
        CHECK(r.model.head.feature_dim == 8);
    }
}

TEST_CASE("zero-epoch training returns the seeded initialization unchanged") {
    Config cfg = small_toy_config();
    cfg.set("toy.epochs", "0");
    const ToyDataset data = small_data(21);
    const ToyTrainResult a =
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kPlain, cfg, 7);
    const ToyTrainResult b =
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kPlain, cfg, 7);
    CHECK(all_params(a.model) == all_params(b.model));

    Config one = small_toy_config();
    one.set("toy.epochs", "1");
    const ToyTrainResult c =
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kPlain, one, 7);
    CHECK(all_params(a.model) != all_params(c.model));
}

TEST_CASE("training is deterministic and separates the blobs") {
    const Config cfg = small_toy_config();
    const ToyDataset data = small_data(33);
    const ToyTrainResult a =
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kPlain, cfg, 9);
    const ToyTrainResult b =
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kPlain, cfg, 9);
    CHECK(all_params(a.model) == all_params(b.model));
    REQUIRE(a.log.size() == 15);
    for (const ToyEpochLog& e : a.log) {
        CHECK(std::isfinite(e.total));
        CHECK(e.l_bd == 0.0);
        CHECK(e.l_reg == 0.0);
    }
    CHECK(toy_accuracy(a.model, data.in_points, data.in_labels) >= 0.99);

    const Tensor grid_a = uncertainty_grid(a.model, -6, 6, -6, 6, 16);
    const Tensor grid_b = uncertainty_grid(b.model, -6, 6, -6, 6, 16);
    CHECK(grid_a.data == grid_b.data);
}

TEST_CASE("every variant trains a few epochs with finite logged losses") {
    Config cfg = small_toy_config();
    cfg.set("toy.epochs", "3");
    const ToyDataset data = small_data(41);
    for (ToyVariant v : all_toy_variants()) {
        const ToyTrainResult r = train_toy_variant(data.in_points, data.in_labels, v, cfg, 5);
        REQUIRE(r.log.size() == 3);
        for (const ToyEpochLog& e : r.log) CHECK(std::isfinite(e.total));
        const bool has_bd = v == ToyVariant::kBoundary;
        const bool has_gp = v == ToyVariant::kGp || v == ToyVariant::kBnGp;
        CHECK((r.log[0].l_bd > 0.0) == has_bd);
        CHECK((r.log[0].l_reg != 0.0) == has_gp);
    }
}

TEST_CASE("uncertainty grid matches per-point taus in row-major order") {
    Config cfg = small_toy_config();
    cfg.set("toy.epochs", "2");
    const ToyDataset data = small_data(2);
    const ToyTrainResult r =
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kPlain, cfg, 3);

    const Tensor grid = uncertainty_grid(r.model, 0.0, 1.0, -1.0, 2.0, 2);
    REQUIRE(grid.shape == std::vector<int>{2, 2});
    const Tensor corners({4, 2}, {0.0, -1.0, 1.0, -1.0, 0.0, 2.0, 1.0, 2.0});
    const std::vector<double> taus = toy_taus(r.model, corners);
    for (int k = 0; k < 4; ++k) CHECK(grid.data[static_cast<std::size_t>(k)] == taus[static_cast<std::size_t>(k)]);
    for (double v : grid.data) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS(uncertainty_grid(r.model, 0, 1, 0, 1, 1), ValueError);
}

TEST_CASE("threshold classification follows tau < theta") {
    const std::vector<double> taus = {0.1, 0.9};
    CHECK(classify_by_threshold(taus, 0.5) == std::vector<int>{1, 0});
    CHECK(classify_by_threshold(taus, 0.0) == std::vector<int>{0, 0});
    CHECK(classify_by_threshold(taus, 1.0) == std::vector<int>{1, 1});
    CHECK_THROWS_AS(classify_by_threshold(taus, -0.1), ValueError);
    CHECK_THROWS_AS(classify_by_threshold(taus, 1.1), ValueError);
}

TEST_CASE("summary statistics are internally consistent") {
    Config cfg = small_toy_config();
    cfg.set("toy.epochs", "6");
    const ToyDataset data = small_data(55);
    const ToyTrainResult r =
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kPlain, cfg, 1);
    const ToySummary s = summarize_toy(r.model, data, 0.3);
    CHECK(s.train_acc >= 0.9);
    CHECK(s.ood_low_tau_frac >= 0.0);
    CHECK(s.ood_low_tau_frac <= 1.0);
    CHECK(s.auroc_in_vs_ood >= 0.0);
    CHECK(s.auroc_in_vs_ood <= 1.0);
    CHECK(s.mean_tau_in >= 0.0);
    CHECK(s.mean_tau_ood <= 1.0);
}

TEST_CASE("runaway gradient-penalty training surfaces a clean divergence error") {
    Config cfg = small_toy_config();
    cfg.set("toy.epochs", "4");
    cfg.set("toy.lr", "1e300");
    const ToyDataset data = small_data(3);
    CHECK_THROWS_AS(
        train_toy_variant(data.in_points, data.in_labels, ToyVariant::kGp, cfg, 2),
        TrainingDiverged);
}
