#include "rbfood/io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rbfood/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint and dataset codecs write raw little-endian words");

namespace rbfood {

namespace {

constexpr const char* kCkptHeader = "RBFOOD-CKPT 1";

}  // namespace

namespace rec {

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw IoError("truncated file '" + path + "'");
    return v;
}

void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in, const std::string& path, std::uint64_t limit) {
    const std::uint64_t n = read_u64(in, path);
    if (n > limit) throw IoError("corrupt length field in '" + path + "'");
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw IoError("truncated file '" + path + "'");
    return s;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> read_doubles(std::istream& in, const std::string& path) {
    const std::uint64_t n = read_u64(in, path);
    if (n > (1ULL << 32)) throw IoError("corrupt length field in '" + path + "'");
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw IoError("truncated file '" + path + "'");
    return v;
}

void write_tensor(std::ostream& out, const Tensor& t) {
    write_u64(out, t.shape.size());
    for (int d : t.shape) write_u64(out, static_cast<std::uint64_t>(d));
    write_doubles(out, t.data);
}

Tensor read_tensor(std::istream& in, const std::string& path) {
    const std::uint64_t ndim = read_u64(in, path);
    if (ndim > 8) throw IoError("corrupt tensor record in '" + path + "'");
    std::vector<int> shape;
    std::uint64_t count = 1;
    for (std::uint64_t d = 0; d < ndim; ++d) {
        const std::uint64_t dim = read_u64(in, path);
        if (dim > (1ULL << 31)) throw IoError("corrupt tensor record in '" + path + "'");
        shape.push_back(static_cast<int>(dim));
        count *= dim;
    }
    std::vector<double> data = read_doubles(in, path);
    if (data.size() != count) throw IoError("corrupt tensor record in '" + path + "'");
    return Tensor(std::move(shape), std::move(data));
}

}  // namespace rec

namespace {

std::string format_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string format_fixed6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void Checkpoint::put_meta(const std::string& key, const std::string& value) {
    meta.emplace_back(key, value);
}

void Checkpoint::put_meta_num(const std::string& key, double value) {
    meta.emplace_back(key, format_num(value));
}

void Checkpoint::put_meta_int(const std::string& key, long value) {
    meta.emplace_back(key, std::to_string(value));
}

const std::string& Checkpoint::meta_at(const std::string& key) const {
    for (const auto& [k, v] : meta)
        if (k == key) return v;
    throw IoError("checkpoint is missing metadata key '" + key + "'");
}

double Checkpoint::meta_num(const std::string& key) const {
    return std::strtod(meta_at(key).c_str(), nullptr);
}

long Checkpoint::meta_int(const std::string& key) const {
    return std::strtol(meta_at(key).c_str(), nullptr, 10);
}

bool Checkpoint::has_meta(const std::string& key) const {
    for (const auto& [k, v] : meta)
        if (k == key) return true;
    return false;
}

void Checkpoint::put_tensor(const std::string& name, Tensor t) {
    tensors.emplace_back(name, std::move(t));
}

const Tensor& Checkpoint::tensor_at(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return t;
    throw IoError("checkpoint is missing tensor '" + name + "'");
}

bool Checkpoint::has_tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return true;
    return false;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << kCkptHeader << "\n";
    std::ostringstream meta;
    for (const auto& [k, v] : ck.meta) meta << k << " = " << v << "\n";
    rec::write_string(out, meta.str());
    rec::write_u64(out, ck.tensors.size());
    for (const auto& [name, t] : ck.tensors) {
        rec::write_string(out, name);
        rec::write_tensor(out, t);
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (header != kCkptHeader)
        throw IoError("'" + path + "' is not a checkpoint (bad header '" + header + "')");
    Checkpoint ck;
    std::istringstream meta(rec::read_string(in, path, 1ULL << 24));
    std::string line;
    while (std::getline(meta, line)) {
        const std::size_t eq = line.find(" = ");
        if (eq == std::string::npos)
            throw IoError("malformed checkpoint metadata line '" + line + "' in '" + path + "'");
        ck.meta.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    const std::uint64_t count = rec::read_u64(in, path);
    if (count > 100000) throw IoError("corrupt tensor count in '" + path + "'");
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::string name = rec::read_string(in, path, 4096);
        ck.tensors.emplace_back(name, rec::read_tensor(in, path));
    }
    return ck;
}

void write_umap(const std::string& path, const Tensor& map) {
    if (map.shape.size() != 2)
        throw ShapeError("uncertainty map must be 2-d, got " + map.shape_str());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    const int h = map.shape[0], w = map.shape[1];
    out << "UMAP 1\n" << w << " " << h << "\n";
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (x) out << " ";
            out << format_fixed6(map.data[static_cast<std::size_t>(y) * w + x]);
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

Tensor read_umap(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string magic;
    int version = 0, w = 0, h = 0;
    in >> magic >> version >> w >> h;
    if (!in || magic != "UMAP" || version != 1)
        throw IoError("'" + path + "' is not an uncertainty map file");
    if (w <= 0 || h <= 0) throw IoError("bad dimensions in '" + path + "'");
    Tensor map = Tensor::zeros({h, w});
    for (auto& v : map.data) {
        in >> v;
        if (!in) throw IoError("truncated uncertainty map '" + path + "'");
    }
    return map;
}

void write_pgm(const std::string& path, const Tensor& tau_map) {
    if (tau_map.shape.size() != 2)
        throw ShapeError("pgm render needs a 2-d map, got " + tau_map.shape_str());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    const int h = tau_map.shape[0], w = tau_map.shape[1];
    out << "P2\n" << w << " " << h << "\n255\n";
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double tau = tau_map.data[static_cast<std::size_t>(y) * w + x];
            int v = static_cast<int>(std::lround(255.0 * (1.0 - tau)));
            if (v < 0) v = 0;
            if (v > 255) v = 255;
            if (x) out << " ";
            out << v;
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

void write_scores_csv(const std::string& path, const std::vector<ScoredSample>& samples) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << "score,label\n";
    for (const auto& s : samples) out << format_fixed6(s.score) << "," << (s.label ? 1 : 0) << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<ScoredSample> read_scores_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != "score,label")
        throw IoError("'" + path + "' is not a score file (expected header 'score,label')");
    std::vector<ScoredSample> samples;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("'" + path + "' line " + std::to_string(lineno) + ": expected score,label");
        char* end = nullptr;
        const std::string score_text = line.substr(0, comma);
        const double score = std::strtod(score_text.c_str(), &end);
        const std::string label = line.substr(comma + 1);
        if (end == score_text.c_str() || (label != "0" && label != "1"))
            throw IoError("'" + path + "' line " + std::to_string(lineno) + ": bad row '" + line +
                          "'");
        samples.push_back({score, label == "1"});
    }
    return samples;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace rbfood
