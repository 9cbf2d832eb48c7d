#pragma once
#include <stdexcept>
#include <string>

namespace rbfood {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad tensor/layer geometry: wrong dims, incompatible adjacent layers.
struct ShapeError : Error {
    using Error::Error;
};

// Bad value passed to an operation (out-of-range threshold, non-finite input, ...).
struct ValueError : Error {
    using Error::Error;
};

// Malformed or unknown configuration key/value.
struct ConfigError : Error {
    using Error::Error;
};

// File missing, unreadable, or malformed on-disk format.
struct IoError : Error {
    using Error::Error;
};

// Training hit a non-finite loss or gradient; carries where it happened.
struct TrainingDiverged : Error {
    int epoch = -1;
    int batch = -1;
    TrainingDiverged(const std::string& what, int epoch_, int batch_)
        : Error(what + " (epoch " + std::to_string(epoch_) + ", batch " + std::to_string(batch_) + ")"),
          epoch(epoch_),
          batch(batch_) {}
};

}  // namespace rbfood
