#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pranet/config.hpp"
#include "pranet/model.hpp"

namespace pranet {

// Binary container, little-endian throughout:
//   "PRNT" | u32 version | u64 len + config JSON | u32 count + manifest
//   | u64 payload bytes + f32 payload | u64 training-log digest
// Manifest entries are (name, 4 x i32 shape, u64 byte offset into the payload)
// in parameter creation order. A save -> load -> save round trip is
// byte-identical.
struct Checkpoint {
    static constexpr std::uint32_t kFormatVersion = 1;

    struct Entry {
        std::string path;
        Shape shape;
        std::uint64_t byte_offset = 0;
    };

    std::uint32_t format_version = kFormatVersion;
    RunConfig config;
    std::vector<Entry> manifest;
    std::vector<float> payload;
    std::uint64_t training_log_digest = 0;
};

std::uint64_t fnv1a64(const std::string& text);

void save_checkpoint(const std::string& path, const ParamStore<float>& params,
                     const RunConfig& config, std::uint64_t training_log_digest);

Checkpoint load_checkpoint(const std::string& path);

// Rebuilds the parameter store described by the checkpoint's own config and
// fills it from the payload; any manifest/config disagreement is rejected.
ParamStore<float> params_from_checkpoint(const Checkpoint& ck);

}  // namespace pranet
