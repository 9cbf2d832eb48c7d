#include "rbfood/synthbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <utility>

#include "rbfood/errors.hpp"
#include "rbfood/io.hpp"
#include "rbfood/rng.hpp"

namespace rbfood {

namespace {

constexpr const char* kDataHeader = "RBFOOD-DATA 1";

struct Rgb {
    double r, g, b;
};

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// Intrinsic s x s mask for one shape class, pixel centers at integer + 0.5.
Tensor shape_mask(int class_id, int s) {
    Tensor m = Tensor::zeros({s, s});
    const double c = s / 2.0;
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            const double py = i + 0.5, px = j + 0.5;
            bool in = false;
            switch (class_id) {
                case kClassSquare:
                    in = true;
                    break;
                case kClassCircle:
                    in = (px - c) * (px - c) + (py - c) * (py - c) <= c * c;
                    break;
                case kClassTriangle:
                    // apex at top center, base along the bottom edge
                    in = std::abs(px - c) <= py / s * c;
                    break;
                case kClassStar:
                    // six-point star: the triangle union its vertical flip
                    in = std::abs(px - c) <= py / s * c || std::abs(px - c) <= (s - py) / s * c;
                    break;
                case kClassCross:
                    in = std::abs(px - c) <= 0.18 * s || std::abs(py - c) <= 0.18 * s;
                    break;
                default:
                    throw ValueError("shape class id " + std::to_string(class_id) +
                                     " is not an object class");
            }
            m.data[static_cast<std::size_t>(i) * s + j] = in ? 1.0 : 0.0;
        }
    }
    return m;
}

double intersection_area(const Box& a, const Box& b) {
    const double ix = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
    const double iy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
    return ix > 0.0 && iy > 0.0 ? ix * iy : 0.0;
}

bool overlaps_unknown(const Box& box, const SyntheticScene& scene) {
    for (const SceneInstance& inst : scene.instances) {
        if (is_unknown_class(inst.class_id) && intersection_area(box, inst.box) > 0.0)
            return true;
    }
    return false;
}

// 3x3 mean blur on (H,W,C), normalized over in-bounds neighbors.
Tensor blur3(const Tensor& src) {
    const int h = src.shape[0], w = src.shape[1], ch = src.shape[2];
    Tensor out = Tensor::zeros(src.shape);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            for (int c = 0; c < ch; ++c) {
                double sum = 0.0;
                int n = 0;
                for (int di = -1; di <= 1; ++di) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const int ii = i + di, jj = j + dj;
                        if (ii < 0 || ii >= h || jj < 0 || jj >= w) continue;
                        sum += src.data[(static_cast<std::size_t>(ii) * w + jj) * ch + c];
                        ++n;
                    }
                }
                out.data[(static_cast<std::size_t>(i) * w + j) * ch + c] = sum / n;
            }
        }
    }
    return out;
}

// Chebyshev dilation by radius r, separable row pass then column pass.
std::vector<char> dilate_cheb(const std::vector<char>& m, int h, int w, int r) {
    std::vector<char> rows(m.size(), 0), out(m.size(), 0);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            char any = 0;
            for (int dj = std::max(0, j - r); dj <= std::min(w - 1, j + r) && !any; ++dj)
                any = m[static_cast<std::size_t>(i) * w + dj];
            rows[static_cast<std::size_t>(i) * w + j] = any;
        }
    }
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            char any = 0;
            for (int di = std::max(0, i - r); di <= std::min(h - 1, i + r) && !any; ++di)
                any = rows[static_cast<std::size_t>(di) * w + j];
            out[static_cast<std::size_t>(i) * w + j] = any;
        }
    }
    return out;
}

Box jitter_box(const Box& b, double jitter, int img_h, int img_w, Rng& rng) {
    const double dx = rng.uniform(-jitter, jitter) * b.w;
    const double dy = rng.uniform(-jitter, jitter) * b.h;
    double w = std::max(4.0, b.w * (1.0 + rng.uniform(-jitter, jitter)));
    double h = std::max(4.0, b.h * (1.0 + rng.uniform(-jitter, jitter)));
    w = std::min(w, static_cast<double>(img_w));
    h = std::min(h, static_cast<double>(img_h));
    const double x = std::min(std::max(0.0, b.x + b.w / 2 + dx - w / 2), img_w - w);
    const double y = std::min(std::max(0.0, b.y + b.h / 2 + dy - h / 2), img_h - h);
    return {x, y, w, h};
}

// Fraction of object-class pixels inside the integer raster of the box.
double object_fraction(const SyntheticScene& scene, const Box& b) {
    const int img_h = scene.pixel_labels.shape[0], img_w = scene.pixel_labels.shape[1];
    const int r0 = std::max(0, static_cast<int>(b.y)), r1 = std::min(img_h, static_cast<int>(b.y + b.h));
    const int c0 = std::max(0, static_cast<int>(b.x)), c1 = std::min(img_w, static_cast<int>(b.x + b.w));
    std::int64_t obj = 0, total = 0;
    for (int i = r0; i < r1; ++i) {
        for (int j = c0; j < c1; ++j) {
            obj += scene.pixel_labels.data[static_cast<std::size_t>(i) * img_w + j] >= kClassSquare;
            ++total;
        }
    }
    return total ? static_cast<double>(obj) / static_cast<double>(total) : 1.0;
}

void require_range(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("invalid benchmark configuration: " + what);
}

}  // namespace

bool is_background_class(int class_id) { return class_id >= kClassGround && class_id <= kClassWall; }

bool is_known_object_class(int class_id) {
    return class_id >= kClassSquare && class_id <= kClassTriangle;
}

bool is_unknown_class(int class_id) { return class_id == kClassStar || class_id == kClassCross; }

const char* class_name(int class_id) {
    switch (class_id) {
        case kClassGround: return "ground";
        case kClassSky: return "sky";
        case kClassWall: return "wall";
        case kClassSquare: return "square";
        case kClassCircle: return "circle";
        case kClassTriangle: return "triangle";
        case kClassStar: return "star";
        case kClassCross: return "cross";
        case kGtBackground: return "background";
        default: throw ValueError("unknown class id " + std::to_string(class_id));
    }
}

const char* split_name(int split) {
    switch (split) {
        case kSplitTrain: return "train";
        case kSplitTestKnown: return "test_known";
        case kSplitTestOod: return "test_ood";
        default: throw ValueError("unknown split " + std::to_string(split));
    }
}

SyntheticScene generate_scene(const SceneParams& params, std::uint64_t seed) {
    const int h = params.height, w = params.width;
    if (h < 64 || w < 64)
        throw ValueError("scene must be at least 64x64, got " + std::to_string(h) + "x" +
                         std::to_string(w));
    const int size_hi = std::min(params.max_size, std::min(h, w));
    if (params.min_size < 1 || params.min_size > size_hi)
        throw ValueError("shape size range [" + std::to_string(params.min_size) + "," +
                         std::to_string(params.max_size) + "] does not fit a " + std::to_string(h) +
                         "x" + std::to_string(w) + " scene");
    for (int id : params.shapes) {
        if (!is_known_object_class(id) && !is_unknown_class(id))
            throw ValueError("shape class id " + std::to_string(id) + " is not an object class");
    }

    Rng rng(seed);
    SyntheticScene scene;
    scene.image = Tensor::zeros({h, w, 3});
    scene.pixel_labels = Tensor::zeros({h, w});

    // Background: sky over wall over ground, each a vertical gradient with noise.
    const int sky_end = static_cast<int>(std::lround(h * rng.uniform(0.2, 0.35)));
    const int wall_end = static_cast<int>(std::lround(h * rng.uniform(0.55, 0.7)));
    const Rgb bases[3] = {{0.33, 0.48, 0.30}, {0.55, 0.65, 0.85}, {0.55, 0.52, 0.48}};
    for (int i = 0; i < h; ++i) {
        int label;
        int band_lo, band_hi;
        if (i < sky_end) {
            label = kClassSky, band_lo = 0, band_hi = sky_end;
        } else if (i < wall_end) {
            label = kClassWall, band_lo = sky_end, band_hi = wall_end;
        } else {
            label = kClassGround, band_lo = wall_end, band_hi = h;
        }
        const double grad = 0.12 * ((i - band_lo + 0.5) / (band_hi - band_lo) - 0.5);
        const Rgb& base = bases[label];
        for (int j = 0; j < w; ++j) {
            const std::size_t px = (static_cast<std::size_t>(i) * w + j) * 3;
            scene.image.data[px + 0] = clamp01(base.r + grad + rng.uniform(-0.04, 0.04));
            scene.image.data[px + 1] = clamp01(base.g + grad + rng.uniform(-0.04, 0.04));
            scene.image.data[px + 2] = clamp01(base.b + grad + rng.uniform(-0.04, 0.04));
            scene.pixel_labels.data[static_cast<std::size_t>(i) * w + j] = label;
        }
    }

    for (int class_id : params.shapes) {
        const int s = rng.uniform_int(params.min_size, size_hi);
        Box box;
        bool placed = false;
        for (int attempt = 0; attempt < params.max_place_tries && !placed; ++attempt) {
            box = {static_cast<double>(rng.uniform_int(0, w - s)),
                   static_cast<double>(rng.uniform_int(0, h - s)), static_cast<double>(s),
                   static_cast<double>(s)};
            placed = true;
            for (const SceneInstance& other : scene.instances)
                placed = placed && box_iou(box, other.box) <= params.overlap_limit;
        }
        if (!placed)
            throw ValueError(std::string("cannot place ") + class_name(class_id) + " after " +
                             std::to_string(params.max_place_tries) + " tries in a " +
                             std::to_string(h) + "x" + std::to_string(w) +
                             " scene with overlap limit " + std::to_string(params.overlap_limit));

        // saturated flat color with one dominant channel, plus pixel noise
        double color[3];
        const int dominant = rng.uniform_int(0, 2);
        for (int c = 0; c < 3; ++c)
            color[c] = c == dominant ? rng.uniform(0.7, 0.95) : rng.uniform(0.05, 0.35);

        SceneInstance inst;
        inst.box = box;
        inst.class_id = class_id;
        inst.mask = shape_mask(class_id, s);
        const int x0 = static_cast<int>(box.x), y0 = static_cast<int>(box.y);
        for (int i = 0; i < s; ++i) {
            for (int j = 0; j < s; ++j) {
                if (inst.mask.data[static_cast<std::size_t>(i) * s + j] == 0.0) continue;
                const std::size_t px = (static_cast<std::size_t>(y0 + i) * w + (x0 + j)) * 3;
                for (int c = 0; c < 3; ++c)
                    scene.image.data[px + c] = clamp01(color[c] + rng.uniform(-0.03, 0.03));
                scene.pixel_labels.data[static_cast<std::size_t>(y0 + i) * w + (x0 + j)] = class_id;
            }
        }
        scene.instances.push_back(std::move(inst));
    }
    return scene;
}

FeatureRecipe parse_recipe(const std::string& name) {
    if (name == "appearance") return FeatureRecipe::kAppearance;
    if (name == "context") return FeatureRecipe::kContext;
    throw ConfigError("unknown feature recipe '" + name + "' (expected appearance or context)");
}

const char* recipe_name(FeatureRecipe recipe) {
    return recipe == FeatureRecipe::kAppearance ? "appearance" : "context";
}

int recipe_channels(FeatureRecipe recipe) {
    return recipe == FeatureRecipe::kAppearance ? 5 : 8;
}

std::vector<std::pair<int, int>> extract_boundary_pixels(const Tensor& labels28, int radius) {
    if (labels28.shape.size() != 2)
        throw ShapeError("label map must be 2-d, got " + labels28.shape_str());
    if (radius < 1) throw ValueError("boundary radius must be >= 1, got " + std::to_string(radius));
    const int h = labels28.shape[0], w = labels28.shape[1];
    std::vector<char> obj(labels28.data.size(), 0), bg(labels28.data.size(), 0);
    for (std::size_t i = 0; i < labels28.data.size(); ++i) {
        const double v = labels28.data[i];
        obj[i] = v >= kClassSquare && v <= kClassCross;
        bg[i] = v >= kClassGround && v <= kClassWall;
    }
    const std::vector<char> dobj = dilate_cheb(obj, h, w, radius);
    const std::vector<char> dbg = dilate_cheb(bg, h, w, radius);
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            if (dobj[static_cast<std::size_t>(i) * w + j] && dbg[static_cast<std::size_t>(i) * w + j])
                out.emplace_back(i, j);
        }
    }
    return out;
}

int auto_label(const Box& box, const std::vector<SceneInstance>& instances, double iou_threshold) {
    if (!(iou_threshold > 0.0 && iou_threshold < 1.0))
        throw ValueError("iou threshold must lie in (0,1), got " + std::to_string(iou_threshold));
    double best_iou = 0.0;
    int best_class = kGtBackground;
    for (const SceneInstance& inst : instances) {
        const double iou = box_iou(box, inst.box);
        if (iou > best_iou) {
            best_iou = iou;
            best_class = inst.class_id;
        }
    }
    return best_iou > iou_threshold ? best_class : kGtBackground;
}

Proposal render_proposal(const SyntheticScene& scene, const Box& box, FeatureRecipe recipe,
                         int boundary_radius, double iou_threshold) {
    if (scene.image.shape.size() != 3 || scene.image.shape[2] != 3)
        throw ShapeError("scene image must be (H,W,3), got " + scene.image.shape_str());
    const int img_h = scene.image.shape[0], img_w = scene.image.shape[1];
    if (box.w <= 0.0 || box.h <= 0.0) throw ValueError("degenerate proposal box (zero area)");
    if (box.x < 0.0 || box.y < 0.0 || box.x + box.w > img_w || box.y + box.h > img_h)
        throw ValueError("proposal box lies outside the image");

    const int f = recipe_channels(recipe);
    const Tensor crop = roi_bilinear(scene.image, box, 14, 14);
    Tensor wide;
    if (recipe == FeatureRecipe::kContext) {
        // double-size crop about the same center; border samples clamp
        const Box wide_box{box.x - box.w / 2, box.y - box.h / 2, 2 * box.w, 2 * box.h};
        wide = blur3(blur3(roi_bilinear(scene.image, wide_box, 14, 14)));
    }

    Proposal p;
    p.box = box;
    p.features = Tensor::zeros({14, 14, f});
    for (int i = 0; i < 14; ++i) {
        for (int j = 0; j < 14; ++j) {
            const std::size_t src = (static_cast<std::size_t>(i) * 14 + j) * 3;
            const std::size_t dst = (static_cast<std::size_t>(i) * 14 + j) * f;
            for (int c = 0; c < 3; ++c) p.features.data[dst + c] = crop.data[src + c];
            p.features.data[dst + 3] = j / 13.0;
            p.features.data[dst + 4] = i / 13.0;
            if (recipe == FeatureRecipe::kContext)
                for (int c = 0; c < 3; ++c) p.features.data[dst + 5 + c] = wide.data[src + c];
        }
    }

    const Tensor ids = roi_nearest(scene.pixel_labels, box, 28, 28);
    const Tensor sub = roi_nearest(scene.pixel_labels, box, 56, 56);
    const auto boundary = extract_boundary_pixels(ids, boundary_radius);
    std::vector<char> on_boundary(28 * 28, 0);
    for (const auto& [r, c] : boundary) on_boundary[static_cast<std::size_t>(r) * 28 + c] = 1;
    p.labels28 = ids;
    for (int i = 0; i < 28; ++i) {
        for (int j = 0; j < 28; ++j) {
            const std::size_t cell = static_cast<std::size_t>(i) * 28 + j;
            if (on_boundary[cell]) {
                p.labels28.data[cell] = kBoundaryLabel;
                continue;
            }
            // a cell whose 2x supersamples disagree lost content to resampling
            bool mixed = false;
            for (int di = 0; di < 2 && !mixed; ++di)
                for (int dj = 0; dj < 2 && !mixed; ++dj)
                    mixed = sub.data[static_cast<std::size_t>(2 * i + di) * 56 + (2 * j + dj)] !=
                            ids.data[cell];
            if (mixed) p.labels28.data[cell] = kIgnoreLabel;
        }
    }
    p.gt_class = auto_label(box, scene.instances, iou_threshold);
    return p;
}

SceneDataset generate_dataset(const Config& config, std::uint64_t seed) {
    const int n_train = config.integer("bench.train_scenes");
    const int n_test = config.integer("bench.test_scenes");
    const int height = config.integer("bench.height"), width = config.integer("bench.width");
    const int min_shapes = config.integer("bench.min_shapes");
    const int max_shapes = config.integer("bench.max_shapes");
    const int unknown_min = config.integer("bench.unknown_min");
    const int unknown_max = config.integer("bench.unknown_max");
    const int jitter_per_object = config.integer("bench.jitter_per_object");
    const double box_jitter = config.num("bench.box_jitter");
    const double iou_threshold = config.num("bench.iou_threshold");
    const int boundary_radius = config.integer("bench.boundary_radius");
    const int max_tries = config.integer("bench.max_place_tries");
    const FeatureRecipe recipe = parse_recipe(config.str("bench.feature_recipe"));
    require_range(n_train >= 1 && n_test >= 1, "scene counts must be >= 1");
    require_range(0 <= min_shapes && min_shapes <= max_shapes, "shape count range is empty");
    require_range(0 <= unknown_min && unknown_min <= unknown_max, "unknown count range is empty");
    require_range(jitter_per_object >= 1, "bench.jitter_per_object must be >= 1");

    SceneParams base;
    base.height = height;
    base.width = width;
    base.min_size = config.integer("bench.shape_min_size");
    base.max_size = config.integer("bench.shape_max_size");
    base.overlap_limit = config.num("bench.overlap_limit");
    base.max_place_tries = max_tries;

    const int total = n_train + n_test;
    SceneDataset ds;
    ds.recipe = recipe_name(recipe);
    ds.feature_dim = recipe_channels(recipe);
    ds.scenes.resize(static_cast<std::size_t>(total));
    std::vector<std::vector<Proposal>> per_scene(static_cast<std::size_t>(total));

    std::exception_ptr error;
    // each iteration writes only scenes[idx] and per_scene[idx]
#pragma omp parallel for schedule(dynamic)
    for (int idx = 0; idx < total; ++idx) {
        try {
            const bool is_test = idx >= n_train;
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(idx)));
            SceneParams params = base;
            const int n_known = rng.uniform_int(min_shapes, max_shapes);
            for (int k = 0; k < n_known; ++k)
                params.shapes.push_back(kClassSquare + rng.uniform_int(0, 2));
            if (is_test) {
                const int n_unknown = rng.uniform_int(unknown_min, unknown_max);
                for (int k = 0; k < n_unknown; ++k)
                    params.shapes.push_back(kClassStar + rng.uniform_int(0, 1));
            }
            SyntheticScene scene =
                generate_scene(params, mix_seed(mix_seed(seed, 0x5ce9e), static_cast<std::uint64_t>(idx)));
            scene.id = idx;

            std::vector<Proposal>& props = per_scene[static_cast<std::size_t>(idx)];
            for (const SceneInstance& inst : scene.instances) {
                for (int k = 0; k < jitter_per_object; ++k) {
                    const Box b = jitter_box(inst.box, box_jitter, height, width, rng);
                    Proposal p = render_proposal(scene, b, recipe, boundary_radius, iou_threshold);
                    p.scene_id = idx;
                    p.split = !is_test            ? kSplitTrain
                              : overlaps_unknown(b, scene) ? kSplitTestOod
                                                           : kSplitTestKnown;
                    props.push_back(std::move(p));
                }
            }
            const int n_bg =
                static_cast<int>(scene.instances.size()) * jitter_per_object / 2;
            for (int k = 0; k < n_bg; ++k) {
                for (int attempt = 0; attempt < max_tries; ++attempt) {
                    const double bw = rng.uniform(base.min_size, 0.6 * std::min(height, width));
                    const double bh = rng.uniform(base.min_size, 0.6 * std::min(height, width));
                    const Box b{rng.uniform(0.0, width - bw), rng.uniform(0.0, height - bh), bw, bh};
                    // background proposals stay mostly background and, in test
                    // scenes, clear of unknown instances
                    if (object_fraction(scene, b) > 0.2) continue;
                    if (is_test && overlaps_unknown(b, scene)) continue;
                    Proposal p = render_proposal(scene, b, recipe, boundary_radius, iou_threshold);
                    p.scene_id = idx;
                    p.split = is_test ? kSplitTestKnown : kSplitTrain;
                    props.push_back(std::move(p));
                    break;
                }
            }
            ds.scenes[static_cast<std::size_t>(idx)] = std::move(scene);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    int next_id = 0;
    for (auto& props : per_scene) {
        for (Proposal& p : props) {
            p.id = next_id++;
            ds.proposals.push_back(std::move(p));
        }
    }
    return ds;
}

void save_dataset(const std::string& path, const SceneDataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << kDataHeader << "\n";
    std::ostringstream meta;
    meta << "recipe = " << ds.recipe << "\n";
    meta << "feature_dim = " << ds.feature_dim << "\n";
    meta << "scenes = " << ds.scenes.size() << "\n";
    meta << "proposals = " << ds.proposals.size() << "\n";
    rec::write_string(out, meta.str());
    rec::write_u64(out, ds.scenes.size());
    for (const SyntheticScene& scene : ds.scenes) {
        rec::write_u64(out, static_cast<std::uint64_t>(scene.id));
        rec::write_tensor(out, scene.image);
        rec::write_tensor(out, scene.pixel_labels);
        rec::write_u64(out, scene.instances.size());
        for (const SceneInstance& inst : scene.instances) {
            rec::write_u64(out, static_cast<std::uint64_t>(inst.class_id));
            rec::write_doubles(out, {inst.box.x, inst.box.y, inst.box.w, inst.box.h});
            rec::write_tensor(out, inst.mask);
        }
    }
    rec::write_u64(out, ds.proposals.size());
    for (const Proposal& p : ds.proposals) {
        rec::write_u64(out, static_cast<std::uint64_t>(p.scene_id));
        rec::write_u64(out, static_cast<std::uint64_t>(p.id));
        rec::write_u64(out, static_cast<std::uint64_t>(p.split));
        rec::write_u64(out, static_cast<std::uint64_t>(p.gt_class));
        rec::write_doubles(out, {p.box.x, p.box.y, p.box.w, p.box.h});
        rec::write_tensor(out, p.features);
        rec::write_tensor(out, p.labels28);
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

Box read_box(std::istream& in, const std::string& path) {
    const std::vector<double> v = rec::read_doubles(in, path);
    if (v.size() != 4) throw IoError("corrupt box record in '" + path + "'");
    return {v[0], v[1], v[2], v[3]};
}

}  // namespace

SceneDataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (header != kDataHeader)
        throw IoError("'" + path + "' is not a dataset (bad header '" + header + "')");
    SceneDataset ds;
    std::istringstream meta(rec::read_string(in, path, 1ULL << 20));
    std::string line;
    while (std::getline(meta, line)) {
        const std::size_t eq = line.find(" = ");
        if (eq == std::string::npos)
            throw IoError("malformed dataset metadata line '" + line + "' in '" + path + "'");
        const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
        if (key == "recipe") ds.recipe = value;
        if (key == "feature_dim") ds.feature_dim = static_cast<int>(std::strtol(value.c_str(), nullptr, 10));
    }
    const std::uint64_t n_scenes = rec::read_u64(in, path);
    if (n_scenes > 1000000) throw IoError("corrupt scene count in '" + path + "'");
    for (std::uint64_t s = 0; s < n_scenes; ++s) {
        SyntheticScene scene;
        scene.id = static_cast<int>(rec::read_u64(in, path));
        scene.image = rec::read_tensor(in, path);
        scene.pixel_labels = rec::read_tensor(in, path);
        if (scene.image.shape.size() != 3 || scene.image.shape[2] != 3 ||
            scene.pixel_labels.shape.size() != 2)
            throw IoError("corrupt scene record in '" + path + "'");
        const std::uint64_t n_inst = rec::read_u64(in, path);
        if (n_inst > 10000) throw IoError("corrupt instance count in '" + path + "'");
        for (std::uint64_t k = 0; k < n_inst; ++k) {
            SceneInstance inst;
            inst.class_id = static_cast<int>(rec::read_u64(in, path));
            inst.box = read_box(in, path);
            inst.mask = rec::read_tensor(in, path);
            scene.instances.push_back(std::move(inst));
        }
        ds.scenes.push_back(std::move(scene));
    }
    const std::uint64_t n_props = rec::read_u64(in, path);
    if (n_props > 10000000) throw IoError("corrupt proposal count in '" + path + "'");
    for (std::uint64_t k = 0; k < n_props; ++k) {
        Proposal p;
        p.scene_id = static_cast<int>(rec::read_u64(in, path));
        p.id = static_cast<int>(rec::read_u64(in, path));
        p.split = static_cast<int>(rec::read_u64(in, path));
        p.gt_class = static_cast<int>(rec::read_u64(in, path));
        if (p.split > kSplitTestOod || p.gt_class > kGtBackground)
            throw IoError("corrupt proposal record in '" + path + "'");
        p.box = read_box(in, path);
        p.features = rec::read_tensor(in, path);
        p.labels28 = rec::read_tensor(in, path);
        ds.proposals.push_back(std::move(p));
    }
    return ds;
}

void write_dataset_index(const std::string& path, const SceneDataset& ds) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "scene,proposal,split,gt_class\n";
    for (const Proposal& p : ds.proposals)
        out << p.scene_id << "," << p.id << "," << split_name(p.split) << ","
            << class_name(p.gt_class) << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace rbfood
