#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pranet {

// 8-bit interleaved pixels; channels is 1 (gray) or 3 (rgb)
struct ImageU8 {
    int width = 0, height = 0, channels = 0;
    std::vector<std::uint8_t> pixels;
};

// Decodes any PNG to 8-bit gray or rgb: palette expanded, 16-bit stripped,
// alpha dropped. Throws IoError on missing or undecodable files.
ImageU8 read_png(const std::string& path);

void write_png_gray(const std::string& path, int width, int height,
                    const std::vector<std::uint8_t>& pixels);
void write_png_rgb(const std::string& path, int width, int height,
                   const std::vector<std::uint8_t>& pixels);

}  // namespace pranet
