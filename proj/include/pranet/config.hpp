#pragma once

#include <cstdint>
#include <string>

#include "pranet/model.hpp"

namespace pranet {

struct DataSource {
    enum class Kind { synthetic, directories };
    Kind kind = Kind::synthetic;
    int n = 250;
    int size = 64;
    std::uint64_t seed = 1;  // only meaningful for standalone (eval-side) sources;
                             // training always substitutes the run seed
    std::string image_dir, mask_dir;
};

// Desk-scale defaults: 64x64 synthetic input and batch 8; epochs, learning
// rate and the multi-scale set keep the full recipe's values.
struct RunConfig {
    ModelConfig model{.input_size = 64};
    int epochs = 20;
    int batch_size = 8;
    float lr = 1e-4f;
    std::uint64_t seed = 1;
    DataSource data;
    std::string output_dir = "run";

    void validate() const;

    // fixed field order so identical configs serialize to identical bytes
    std::string to_json() const;
    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_json_file(const std::string& path);
};

}  // namespace pranet
