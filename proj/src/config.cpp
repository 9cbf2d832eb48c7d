#include "rbfood/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rbfood/errors.hpp"

namespace rbfood {

namespace {

const std::vector<ConfigKey> kRegistry = {
    {"train.lr", "real", "0.1", "initial learning rate"},
    {"train.momentum", "real", "0.9", "SGD momentum"},
    {"train.batch", "int", "64", "minibatch size"},
    {"train.lr_decay_factor", "real", "10", "learning rate divisor applied every decay period"},
    {"train.lr_decay_period", "int", "10", "epochs between learning rate decays"},
    {"train.ema", "real", "0.999", "momentum of the EMA center update"},
    {"train.lambda_gp", "real", "0.5", "gradient penalty weight"},
    {"train.gp_fd_eps", "real", "0.001", "finite-difference step for gradient penalty"},
    {"head.sigma", "real", "0.1", "RBF kernel length scale, shared by all heads"},
    {"toy.variant", "string", "plain", "plain | bn | gp | bn+gp | spectral | boundary"},
    {"toy.epochs", "int", "40", "toy training epochs"},
    {"toy.hidden", "int", "32", "toy MLP hidden width"},
    {"toy.feature_dim", "int", "2", "toy MLP output feature dimension"},
    {"toy.centers", "int", "1", "RBF centers per class in the toy head"},
    {"toy.sigma", "real", "2.0", "RBF kernel length scale for the toy head"},
    {"toy.lr", "real", "0.02", "toy initial learning rate"},
    {"toy.ema", "real", "0.95", "toy center EMA momentum"},
    {"toy.n_per_class", "int", "500", "in-distribution points per class"},
    {"toy.n_ood", "int", "1000", "uniform out-of-distribution points"},
    {"toy.bg_mean_x", "real", "-2", "background blob mean, x"},
    {"toy.bg_mean_y", "real", "0", "background blob mean, y"},
    {"toy.obj_mean_x", "real", "2", "object blob mean, x"},
    {"toy.obj_mean_y", "real", "0", "object blob mean, y"},
    {"toy.cov_scale", "real", "0.3", "isotropic blob covariance scale"},
    {"toy.ood_halfwidth", "real", "6", "half-width of the square OOD sampling box"},
    {"toy.boundary_count", "int", "128", "boundary points sampled per batch for the boundary variant"},
    {"toy.boundary_jitter", "real", "0.8", "Gaussian jitter applied to boundary midpoints"},
    {"toy.grid_resolution", "int", "64", "uncertainty grid nodes per axis"},
    {"bench.train_scenes", "int", "48", "training scenes to generate"},
    {"bench.test_scenes", "int", "24", "test scenes to generate"},
    {"bench.height", "int", "96", "scene height in pixels"},
    {"bench.width", "int", "96", "scene width in pixels"},
    {"bench.min_shapes", "int", "2", "minimum known shapes per scene"},
    {"bench.max_shapes", "int", "4", "maximum known shapes per scene"},
    {"bench.unknown_min", "int", "1", "minimum unknown shapes per test scene"},
    {"bench.unknown_max", "int", "2", "maximum unknown shapes per test scene"},
    {"bench.shape_min_size", "int", "18", "minimum shape bounding size in pixels"},
    {"bench.shape_max_size", "int", "40", "maximum shape bounding size in pixels"},
    {"bench.overlap_limit", "real", "0.3", "maximum IoU allowed between placed shapes"},
    {"bench.max_place_tries", "int", "100", "rejection-sampling attempts per shape"},
    {"bench.jitter_per_object", "int", "2", "jittered proposals per ground-truth box"},
    {"bench.box_jitter", "real", "0.15", "proposal jitter as a fraction of box size"},
    {"bench.iou_threshold", "real", "0.5", "IoU threshold for proposal auto-labeling"},
    {"bench.boundary_radius", "int", "1", "Chebyshev radius of the boundary band at 28x28"},
    {"bench.feature_recipe", "string", "context", "appearance | context"},
    {"seg.head", "string", "rbf", "rbf | dropout | entropy"},
    {"seg.regularizer", "string", "none", "none | gp | boundary"},
    {"seg.conv_layers", "int", "4", "conv layers before the upsampling step (0 = none)"},
    {"seg.conv_width", "int", "64", "conv layer width"},
    {"seg.feature_dim", "int", "32", "per-pixel feature dimension fed to the head"},
    {"seg.centers", "int", "16", "RBF centers per class in the segmentation head"},
    {"seg.bg_only", "bool", "false", "train only on background-class pixels"},
    {"seg.theta_bg", "real", "0.5", "background score threshold for the object mask"},
    {"seg.dropout_p", "real", "0.5", "dropout rate of the dropout baseline"},
    {"seg.dropout_passes", "int", "10", "stochastic passes of the dropout baseline"},
    {"seg.epochs", "int", "10", "segmentation training epochs"},
    {"cls.centers", "int", "16", "RBF centers per class in the classification head"},
    {"cls.epochs", "int", "15", "classification training epochs"},
    {"cls.merge_labels", "bool", "false", "merge all known object classes into one label"},
    {"cls.pool_source", "string", "stack", "stack | input: activations pooled under the mask"},
    {"pipe.nms_iou", "real", "0.5", "IoU above which a lower-ranked proposal is dropped"},
    {"pipe.theta_cls", "real", "0.3", "proposals with u_cls below this are discarded"},
    {"pipe.theta_flag", "real", "0.5", "detections with u_cls above this are flagged"},
    {"pipe.accumulate", "string", "max", "max | sum | mean: per-pixel overlap combination"},
    {"pipe.objectness_noise", "real", "0.05", "noise amplitude added to synthetic objectness"},
};

const ConfigKey* find_key(const std::string& name) {
    for (const auto& k : kRegistry)
        if (name == k.name) return &k;
    return nullptr;
}

bool parse_real(const std::string& s, double* out) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') return false;
    *out = v;
    return true;
}

bool parse_int(const std::string& s, long* out) {
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0') return false;
    *out = v;
    return true;
}

void validate(const ConfigKey& key, const std::string& value) {
    const std::string type = key.type;
    if (type == "real") {
        double v;
        if (!parse_real(value, &v))
            throw ConfigError("config key '" + std::string(key.name) + "' expects a real, got '" +
                              value + "'");
    } else if (type == "int") {
        long v;
        if (!parse_int(value, &v))
            throw ConfigError("config key '" + std::string(key.name) +
                              "' expects an integer, got '" + value + "'");
    } else if (type == "bool") {
        if (value != "true" && value != "false")
            throw ConfigError("config key '" + std::string(key.name) +
                              "' expects true or false, got '" + value + "'");
    }
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

const std::vector<ConfigKey>& Config::registry() { return kRegistry; }

Config Config::defaults() {
    Config c;
    for (const auto& k : kRegistry) c.values_[k.name] = k.default_value;
    return c;
}

Config Config::from_string(const std::string& text) {
    Config c = defaults();
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

void Config::set(const std::string& key, const std::string& value) {
    const ConfigKey* k = find_key(key);
    if (!k) throw ConfigError("unknown config key '" + key + "'");
    validate(*k, value);
    values_[key] = value;
}

const std::string& Config::raw(const std::string& key, const char* want_type) const {
    const ConfigKey* k = find_key(key);
    if (!k) throw ConfigError("unknown config key '" + key + "'");
    if (want_type && std::string(k->type) != want_type)
        throw ConfigError("config key '" + key + "' is a " + k->type + ", requested as " +
                          want_type);
    return values_.at(key);
}

double Config::num(const std::string& key) const {
    double v = 0.0;
    parse_real(raw(key, "real"), &v);
    return v;
}

int Config::integer(const std::string& key) const {
    long v = 0;
    parse_int(raw(key, "int"), &v);
    return static_cast<int>(v);
}

bool Config::flag(const std::string& key) const { return raw(key, "bool") == "true"; }

const std::string& Config::str(const std::string& key) const { return raw(key, "string"); }

std::string Config::dump() const {
    std::ostringstream out;
    for (const auto& k : kRegistry) out << k.name << " = " << values_.at(k.name) << "\n";
    return out.str();
}

}  // namespace rbfood
