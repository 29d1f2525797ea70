#pragma once

#include <stdexcept>
#include <string>

namespace pranet {

// Error categories map 1:1 onto CLI exit codes:
//   InvalidArgument -> 2, IoError -> 3, NumericError -> 4.
struct InvalidArgument : std::runtime_error {
    explicit InvalidArgument(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// A checkpoint file that parses but has an unknown format version or a
// parameter manifest that does not match its own config.
struct UnsupportedCheckpoint : IoError {
    explicit UnsupportedCheckpoint(const std::string& msg) : IoError(msg) {}
};

// A metric that has no defined value for a particular image (e.g. the
// weighted F-measure on an empty ground-truth mask). Dataset evaluation
// catches this, skips the image for that metric and flags it.
struct UndefinedMetric : std::runtime_error {
    explicit UndefinedMetric(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pranet
