#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rbfood/metrics.hpp"
#include "rbfood/tensor.hpp"

namespace rbfood {

// Low-level length-prefixed binary records shared by the checkpoint and
// dataset codecs. All words are little-endian; reads validate lengths and
// throw IoError naming `path` on truncation.
namespace rec {
void write_u64(std::ostream& out, std::uint64_t v);
std::uint64_t read_u64(std::istream& in, const std::string& path);
void write_string(std::ostream& out, const std::string& s);
std::string read_string(std::istream& in, const std::string& path, std::uint64_t limit);
void write_doubles(std::ostream& out, const std::vector<double>& v);
std::vector<double> read_doubles(std::istream& in, const std::string& path);
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in, const std::string& path);
}  // namespace rec

// On-disk model snapshot: ordered metadata lines plus named parameter
// tensors. The file starts with the text line `RBFOOD-CKPT 1`, then a
// length-prefixed metadata block of `key = value` lines, then the tensors,
// each as name, shape, and raw little-endian doubles, all length-prefixed.
struct Checkpoint {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::pair<std::string, Tensor>> tensors;

    void put_meta(const std::string& key, const std::string& value);
    void put_meta_num(const std::string& key, double value);
    void put_meta_int(const std::string& key, long value);
    const std::string& meta_at(const std::string& key) const;
    double meta_num(const std::string& key) const;
    long meta_int(const std::string& key) const;
    bool has_meta(const std::string& key) const;

    void put_tensor(const std::string& name, Tensor t);
    const Tensor& tensor_at(const std::string& name) const;
    bool has_tensor(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Uncertainty map text format: `UMAP 1`, then `width height`, then height
// rows of width values with six fractional digits. Round-trips exactly at
// that precision.
void write_umap(const std::string& path, const Tensor& map);
Tensor read_umap(const std::string& path);

// 8-bit grayscale PGM (P2) render of an uncertainty map; pixel value is
// round(255 * (1 - tau)), so low uncertainty shows bright.
void write_pgm(const std::string& path, const Tensor& tau_map);

// Score file: CSV with header `score,label`, label in {0,1}, scores with
// six fractional digits.
void write_scores_csv(const std::string& path, const std::vector<ScoredSample>& samples);
std::vector<ScoredSample> read_scores_csv(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// %.6f formatting used by every emitted table and map.
std::string format_fixed6(double v);

}  // namespace rbfood
