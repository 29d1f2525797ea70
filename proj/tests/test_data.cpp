#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <set>

#include "oracles.hpp"
#include "pranet/data.hpp"
#include "pranet/errors.hpp"
#include "pranet/png_io.hpp"

using namespace pranet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() /
               ("pranet_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string sub(const std::string& name) const {
        fs::create_directories(path / name);
        return (path / name).string();
    }
};

void write_gray(const std::string& dir, const std::string& name, int h, int w,
                std::uint8_t value) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w, value);
    write_png_gray(dir + "/" + name, w, h, px);
}

void write_rgb(const std::string& dir, const std::string& name, int h, int w,
               std::uint8_t value) {
    std::vector<std::uint8_t> px(static_cast<std::size_t>(h) * w * 3, value);
    write_png_rgb(dir + "/" + name, w, h, px);
}

}  // namespace

TEST_CASE("png round trip preserves bytes") {
    TempDir tmp("png");
    std::vector<std::uint8_t> px(16 * 16);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::uint8_t>(i);
    const std::string path = (tmp.path / "x.png").string();
    write_png_gray(path, 16, 16, px);
    const ImageU8 img = read_png(path);
    CHECK(img.width == 16);
    CHECK(img.height == 16);
    CHECK(img.channels == 1);
    CHECK(img.pixels == px);
}

TEST_CASE("load_pairs on empty directories yields an empty dataset") {
    TempDir tmp("empty");
    const auto d = load_pairs(tmp.sub("img"), tmp.sub("msk"));
    CHECK(d.empty());
}

TEST_CASE("load_pairs binarizes masks at 128 and orders by filename") {
    TempDir tmp("pairs");
    const auto img = tmp.sub("img");
    const auto msk = tmp.sub("msk");
    write_rgb(img, "b.png", 8, 8, 200);
    write_rgb(img, "a.png", 8, 8, 10);
    write_gray(msk, "a.png", 8, 8, 255);
    write_gray(msk, "b.png", 8, 8, 0);

    const auto d = load_pairs(img, msk);
    REQUIRE(d.size() == 2);
    CHECK(d.samples[0].image_id == "a");
    CHECK(d.samples[1].image_id == "b");
    for (float v : d.samples[0].mask->v) CHECK(v == 1.0f);
    for (float v : d.samples[1].mask->v) CHECK(v == 0.0f);
    CHECK(d.samples[0].image->shape == Shape{1, 3, 8, 8});
    for (float v : d.samples[0].image->v) CHECK(v == doctest::Approx(10.0f / 255.0f));

    SUBCASE("the 128 threshold boundary is sharp") {
        write_rgb(img, "c.png", 4, 4, 0);
        write_gray(msk, "c.png", 4, 4, 128);
        write_rgb(img, "d.png", 4, 4, 0);
        write_gray(msk, "d.png", 4, 4, 127);
        const auto d2 = load_pairs(img, msk);
        REQUIRE(d2.size() == 4);
        for (float v : d2.samples[2].mask->v) CHECK(v == 1.0f);  // c: 128 -> 1
        for (float v : d2.samples[3].mask->v) CHECK(v == 0.0f);  // d: 127 -> 0
    }
}

TEST_CASE("load_pairs reports every missing mask in one error") {
    TempDir tmp("missing");
    const auto img = tmp.sub("img");
    const auto msk = tmp.sub("msk");
    write_rgb(img, "a.png", 4, 4, 1);
    write_rgb(img, "b.png", 4, 4, 2);
    try {
        load_pairs(img, msk);
        FAIL("expected an IoError");
    } catch (const IoError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("a.png") != std::string::npos);
        CHECK(msg.find("b.png") != std::string::npos);
    }
    CHECK_THROWS_AS(load_pairs((tmp.path / "nope").string(), msk), IoError);
}

TEST_CASE("the 80/10/10 split is exact, disjoint and covering") {
    auto d = synth_generate(5, 100, 32);

    SUBCASE("n=100 splits 80/10/10") {
        auto [train, val, test] = split_80_10_10(d, 3);
        CHECK(train.size() == 80);
        CHECK(val.size() == 10);
        CHECK(test.size() == 10);
        CHECK(train.split == Split::train);
        CHECK(val.split == Split::val);
        CHECK(test.split == Split::test);
    }
    SUBCASE("n=10 splits 8/1/1") {
        Dataset small;
        small.samples.assign(d.samples.begin(), d.samples.begin() + 10);
        auto [train, val, test] = split_80_10_10(small, 3);
        CHECK(train.size() == 8);
        CHECK(val.size() == 1);
        CHECK(test.size() == 1);
    }
    SUBCASE("fewer than 10 samples is rejected") {
        Dataset small;
        small.samples.assign(d.samples.begin(), d.samples.begin() + 9);
        CHECK_THROWS_AS(split_80_10_10(small, 3), InvalidArgument);
    }
    SUBCASE("identical seeds give identical membership, and every seed partitions") {
        for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
            auto [t1, v1, s1] = split_80_10_10(d, seed);
            auto [t2, v2, s2] = split_80_10_10(d, seed);
            for (std::size_t i = 0; i < t1.size(); ++i)
                CHECK(t1.samples[i].image_id == t2.samples[i].image_id);

            std::set<std::string> seen;
            for (const auto& part : {t1, v1, s1})
                for (const auto& s : part.samples) CHECK(seen.insert(s.image_id).second);
            CHECK(seen.size() == d.size());
        }
    }
}

TEST_CASE("resize_sample keeps sizes, constants and binary masks") {
    auto d = synth_generate(11, 1, 32);
    const Sample& s = d.samples[0];

    SUBCASE("resizing to the current size changes nothing") {
        const Sample r = resize_sample(s, 32);
        CHECK(r.image->v == s.image->v);
        CHECK(r.mask->v == s.mask->v);
    }
    SUBCASE("a constant mask stays constant at any size") {
        Sample flat = s;
        flat.mask = make_tensor<float>({1, 1, 32, 32}, 1.0f);
        for (int size : {16, 48, 64}) {
            const Sample r = resize_sample(flat, size);
            for (float v : r.mask->v) CHECK(v == 1.0f);
        }
    }
    SUBCASE("masks stay binary after resizing") {
        const Sample r = resize_sample(s, 48);
        for (float v : r.mask->v) CHECK((v == 0.0f || v == 1.0f));
    }
}

TEST_CASE("downscaling a half-plane keeps the boundary within one pixel") {
    Sample s;
    s.image_id = "half";
    s.image = make_tensor<float>({1, 3, 64, 64}, 0.5f);
    s.mask = make_tensor<float>({1, 1, 64, 64});
    for (int y = 32; y < 64; ++y)
        for (int x = 0; x < 64; ++x) s.mask->v[static_cast<std::size_t>(y) * 64 + x] = 1.0f;

    const Sample r = resize_sample(s, 32);
    // geometric oracle: the source row of output row y is 2y + 0.5, so the
    // boundary lands at output row 16
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const float v = r.mask->v[static_cast<std::size_t>(y) * 32 + x];
            if (y <= 14) CHECK(v == 0.0f);
            if (y >= 17) CHECK(v == 1.0f);
        }
}

TEST_CASE("multiscale_view snaps to multiples of 16") {
    auto d = synth_generate(13, 1, 64);
    const Sample& s = d.samples[0];
    CHECK(multiscale_view(s, 1.0, 64).image->shape.h == 64);
    CHECK(multiscale_view(s, 0.75, 64).image->shape.h == 48);
    CHECK(multiscale_view(s, 1.25, 64).image->shape.h == 80);
    for (double scale : {0.75, 1.0, 1.25})
        for (int base : {32, 64, 96})
            CHECK(multiscale_view(s, scale, base).image->shape.h % 16 == 0);
    CHECK_THROWS_AS(multiscale_view(s, 0.1, 64), InvalidArgument);
}

TEST_CASE("synthetic generation is deterministic and well-formed") {
    SUBCASE("n=0 gives an empty dataset") { CHECK(synth_generate(1, 0, 32).empty()); }
    SUBCASE("invalid sizes are rejected") {
        CHECK_THROWS_AS(synth_generate(1, 1, 24), InvalidArgument);
        CHECK_THROWS_AS(synth_generate(1, 1, 50), InvalidArgument);
        CHECK_THROWS_AS(synth_generate(1, -1, 32), InvalidArgument);
    }
    SUBCASE("identical arguments give bitwise-identical datasets") {
        auto a = synth_generate(21, 5, 64);
        auto b = synth_generate(21, 5, 64);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a.samples[i].image_id == b.samples[i].image_id);
            CHECK(a.samples[i].image->v == b.samples[i].image->v);
            CHECK(a.samples[i].mask->v == b.samples[i].mask->v);
        }
    }
    SUBCASE("pixels lie in [0,1] and masks are binary") {
        auto d = synth_generate(31, 8, 64);
        for (const auto& s : d.samples) {
            for (float v : s.image->v) {
                CHECK(v >= 0.0f);
                CHECK(v <= 1.0f);
            }
            for (float v : s.mask->v) CHECK((v == 0.0f || v == 1.0f));
        }
    }
}

TEST_CASE("every synthetic mask keeps its foreground fraction within [1%, 45%]") {
    // Monte-Carlo over 1000 seeds
    for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
        auto d = synth_generate(seed, 1, 64);
        double fg = 0;
        for (float v : d.samples[0].mask->v) fg += v;
        const double fraction = fg / (64.0 * 64.0);
        CHECK(fraction >= 0.01);
        CHECK(fraction <= 0.45);
    }
}

TEST_CASE("exported pairs reload to the same dataset") {
    TempDir tmp("export");
    auto d = synth_generate(17, 3, 32);
    const auto img = tmp.sub("img");
    const auto msk = tmp.sub("msk");
    export_png_pairs(d, img, msk);

    const auto loaded = load_pairs(img, msk);
    REQUIRE(loaded.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(loaded.samples[i].image_id == d.samples[i].image_id);
        CHECK(loaded.samples[i].mask->v == d.samples[i].mask->v);
        for (std::size_t j = 0; j < d.samples[i].image->v.size(); ++j)
            CHECK(std::abs(loaded.samples[i].image->v[j] - d.samples[i].image->v[j]) <=
                  0.5f / 255.0f + 1e-6f);
    }
}
