#include "pranet/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include "pranet/errors.hpp"
#include "pranet/png_io.hpp"
#include "pranet/rng.hpp"

namespace fs = std::filesystem;

namespace pranet {

namespace {

TensorPtrF image_to_tensor(const ImageU8& img) {
    auto t = make_tensor<float>({1, 3, img.height, img.width});
    for (int c = 0; c < 3; ++c) {
        float* plane = t->plane(0, c);
        const int src_c = img.channels == 3 ? c : 0;  // replicate gray to rgb
        for (long long i = 0; i < static_cast<long long>(img.height) * img.width; ++i)
            plane[i] = static_cast<float>(img.pixels[i * img.channels + src_c]) / 255.0f;
    }
    return t;
}

TensorPtrF mask_to_tensor(const ImageU8& img) {
    auto t = make_tensor<float>({1, 1, img.height, img.width});
    for (long long i = 0; i < static_cast<long long>(img.height) * img.width; ++i) {
        int v;
        if (img.channels == 1) {
            v = img.pixels[i];
        } else {
            // integer luma for the occasional rgb mask
            const std::uint8_t* p = &img.pixels[i * 3];
            v = (299 * p[0] + 587 * p[1] + 114 * p[2]) / 1000;
        }
        t->v[i] = v >= 128 ? 1.0f : 0.0f;
    }
    return t;
}

}  // namespace

Dataset load_pairs(const std::string& image_dir, const std::string& mask_dir) {
    if (!fs::is_directory(image_dir)) throw IoError("image directory not found: " + image_dir);
    if (!fs::is_directory(mask_dir)) throw IoError("mask directory not found: " + mask_dir);

    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(image_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());

    std::string missing;
    for (const auto& name : names)
        if (!fs::exists(fs::path(mask_dir) / name)) missing += "\n  " + name;
    if (!missing.empty())
        throw IoError("masks missing for image files:" + missing);

    Dataset d;
    for (const auto& name : names) {
        Sample s;
        s.image_id = fs::path(name).stem().string();
        s.image = image_to_tensor(read_png((fs::path(image_dir) / name).string()));
        s.mask = mask_to_tensor(read_png((fs::path(mask_dir) / name).string()));
        if (s.image->shape.h != s.mask->shape.h || s.image->shape.w != s.mask->shape.w)
            throw IoError("image/mask extents differ for " + name);
        d.samples.push_back(std::move(s));
    }
    return d;
}

std::tuple<Dataset, Dataset, Dataset> split_80_10_10(const Dataset& d, std::uint64_t seed) {
    const std::size_t n = d.samples.size();
    if (n < 10)
        throw InvalidArgument("split needs at least 10 samples, got " + std::to_string(n));

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i)  // Fisher-Yates
        std::swap(idx[i], idx[rng.below(i + 1)]);

    const std::size_t n_train = n * 8 / 10;
    const std::size_t n_val = n / 10;
    Dataset train, val, test;
    train.split = Split::train;
    val.split = Split::val;
    test.split = Split::test;
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = d.samples[idx[i]];
        if (i < n_train)
            train.samples.push_back(s);
        else if (i < n_train + n_val)
            val.samples.push_back(s);
        else
            test.samples.push_back(s);
    }
    return {train, val, test};
}

Sample resize_sample(const Sample& s, int size) {
    TapeF tape;
    tape.set_recording(false);
    Sample out;
    out.image_id = s.image_id;
    out.image = bilinear_resize(tape, s.image, size, size);
    out.mask = bilinear_resize(tape, s.mask, size, size);
    for (float& v : out.mask->v) v = v >= 0.5f ? 1.0f : 0.0f;
    out.image->leaf = out.mask->leaf = true;
    return out;
}

Sample multiscale_view(const Sample& s, double scale, int base) {
    const long long raw = std::llround(base * scale);
    const long long snapped = std::llround(static_cast<double>(raw) / 16.0) * 16;
    if (snapped < 16)
        throw InvalidArgument("multiscale_view target extent " + std::to_string(snapped) +
                              " is below the minimum of 16");
    if (s.image->shape.h == snapped && s.image->shape.w == snapped) return s;
    return resize_sample(s, static_cast<int>(snapped));
}

Dataset synth_generate(std::uint64_t seed, int n, int size) {
    if (n < 0) throw InvalidArgument("synth_generate: n must be non-negative");
    if (size < 32 || size % 16 != 0)
        throw InvalidArgument("synth_generate: size must be >= 32 and divisible by 16, got " +
                              std::to_string(size));

    Dataset d;
    for (int i = 0; i < n; ++i) {
        Rng rng(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(i + 1))));
        Sample s;
        char name[32];
        std::snprintf(name, sizeof(name), "synth_%05d", i);
        s.image_id = name;

        // blob geometry: star-shaped radial boundary around a central point
        const double cx = size * (0.2 + 0.6 * rng.uniform());
        const double cy = size * (0.2 + 0.6 * rng.uniform());
        const double r0 = size * (0.12 + 0.18 * rng.uniform());
        double amp[3], phase[3];
        for (double& a : amp) a = 0.18 * rng.uniform();
        for (double& p : phase) p = 2.0 * 3.14159265358979323846 * rng.uniform();

        double bg[3], fg[3];
        for (double& v : bg) v = rng.uniform();
        for (int c = 0; c < 3; ++c) {
            const double off = 0.15 + 0.20 * rng.uniform();
            fg[c] = bg[c] < 0.5 ? bg[c] + off : bg[c] - off;
        }

        s.mask = make_tensor<float>({1, 1, size, size});
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const double dx = x + 0.5 - cx;
                const double dy = y + 0.5 - cy;
                const double rho = std::sqrt(dx * dx + dy * dy);
                const double theta = std::atan2(dy, dx);
                double boundary = 1.0;
                for (int k = 0; k < 3; ++k)
                    boundary += amp[k] * std::sin((k + 1) * theta + phase[k]);
                s.mask->v[static_cast<std::size_t>(y) * size + x] =
                    rho <= r0 * boundary ? 1.0f : 0.0f;
            }

        s.image = make_tensor<float>({1, 3, size, size});
        for (int y = 0; y < size; ++y)
            for (int x = 0; x < size; ++x) {
                const bool inside = s.mask->v[static_cast<std::size_t>(y) * size + x] != 0.0f;
                for (int c = 0; c < 3; ++c) {
                    const double base = inside ? fg[c] : bg[c];
                    s.image->plane(0, c)[static_cast<std::size_t>(y) * size + x] =
                        static_cast<float>(base + 0.05 * rng.gaussian());
                }
            }

        // two passes of a 3x3 box blur (in-bounds taps only) on the image alone
        std::vector<float> buf(static_cast<std::size_t>(size) * size);
        for (int pass = 0; pass < 2; ++pass)
            for (int c = 0; c < 3; ++c) {
                float* plane = s.image->plane(0, c);
                for (int y = 0; y < size; ++y)
                    for (int x = 0; x < size; ++x) {
                        double acc = 0.0;
                        int cnt = 0;
                        for (int dy = -1; dy <= 1; ++dy)
                            for (int dx = -1; dx <= 1; ++dx) {
                                const int yy = y + dy, xx = x + dx;
                                if (yy < 0 || yy >= size || xx < 0 || xx >= size) continue;
                                acc += plane[static_cast<std::size_t>(yy) * size + xx];
                                ++cnt;
                            }
                        buf[static_cast<std::size_t>(y) * size + x] =
                            static_cast<float>(acc / cnt);
                    }
                std::copy(buf.begin(), buf.end(), plane);
            }
        for (float& v : s.image->v) v = std::clamp(v, 0.0f, 1.0f);

        d.samples.push_back(std::move(s));
    }
    return d;
}

void export_png_pairs(const Dataset& d, const std::string& image_dir,
                      const std::string& mask_dir) {
    fs::create_directories(image_dir);
    fs::create_directories(mask_dir);
    for (const Sample& s : d.samples) {
        const int h = s.image->shape.h, w = s.image->shape.w;
        std::vector<std::uint8_t> rgb(static_cast<std::size_t>(h) * w * 3);
        for (int c = 0; c < 3; ++c) {
            const float* plane = s.image->plane(0, c);
            for (long long i = 0; i < static_cast<long long>(h) * w; ++i)
                rgb[i * 3 + c] = static_cast<std::uint8_t>(
                    std::lround(std::clamp(plane[i], 0.0f, 1.0f) * 255.0f));
        }
        std::vector<std::uint8_t> gray(static_cast<std::size_t>(h) * w);
        for (long long i = 0; i < static_cast<long long>(h) * w; ++i)
            gray[i] = s.mask->v[i] != 0.0f ? 255 : 0;
        write_png_rgb((fs::path(image_dir) / (s.image_id + ".png")).string(), w, h, rgb);
        write_png_gray((fs::path(mask_dir) / (s.image_id + ".png")).string(), w, h, gray);
    }
}

}  // namespace pranet
