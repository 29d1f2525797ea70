#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "pranet/tensor.hpp"

namespace pranet {

struct Sample {
    std::string image_id;
    TensorPtrF image;  // [1,3,h,w], values in [0,1]
    TensorPtrF mask;   // [1,1,h,w], values in {0,1}
};

enum class Split { train, val, test, unsplit };

struct Dataset {
    std::vector<Sample> samples;
    Split split = Split::unsplit;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

// Loads same-named .png pairs, ordered by lexicographic filename. Masks are
// binarized at pixel >= 128. All missing masks are reported in one error.
Dataset load_pairs(const std::string& image_dir, const std::string& mask_dir);

// Seeded shuffle, then floor(0.8n) / floor(0.1n) / remainder. Needs n >= 10.
std::tuple<Dataset, Dataset, Dataset> split_80_10_10(const Dataset& d, std::uint64_t seed);

// Bilinear image resize; the mask is resized the same way and re-binarized at 0.5.
Sample resize_sample(const Sample& s, int size);

// resize_sample to round(base*scale) snapped to the nearest multiple of 16.
Sample multiscale_view(const Sample& s, double scale, int base);

// Deterministic textured-blob dataset: a smooth star-shaped foreground blob
// with its own base color (channel offset >= 0.15 from the background), pixel
// noise on both regions, and a double 3x3 box blur on the image only, so the
// mask boundary stays sharp while the image boundary does not.
Dataset synth_generate(std::uint64_t seed, int n, int size);

// Writes a dataset back out as the load_pairs layout (8-bit PNGs, values
// scaled by 255 and rounded).
void export_png_pairs(const Dataset& d, const std::string& image_dir,
                      const std::string& mask_dir);

}  // namespace pranet
