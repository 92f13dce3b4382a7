/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/// @file test_data.cpp
/// @brief Dataset discovery, corruption simulators and batch sampling.

#include <gtest/gtest.h>

#include "../support/toy.hpp"
#include "cidn/data.hpp"
#include "cidn/errors.hpp"

#include <filesystem>
#include <fstream>
#include <map>

#include <unistd.h>

namespace cidn::data {
namespace {

namespace fs = std::filesystem;

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() / ("cidn_data_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

Image gradient(int64_t h, int64_t w) {
    auto yy = torch::arange(h, torch::kFloat32).view({1, h, 1}).expand({3, h, w});
    auto xx = torch::arange(w, torch::kFloat32).view({1, 1, w}).expand({3, h, w});
    return Image(((yy * 7 + xx * 3).remainder(251.0) / 250.0).contiguous());
}

void make_layout(const fs::path& root, const std::vector<std::string>& low, const std::vector<std::string>& normal,
                 int64_t h = 16, int64_t w = 16) {
    fs::create_directories(root / "low");
    fs::create_directories(root / "normal");
    for (const auto& n : low)
        write_png(Image::constant(h, w, 0.1f), root / "low" / n);
    for (const auto& n : normal)
        write_png(Image::constant(h, w, 0.6f), root / "normal" / n);
}

TEST(LoadPairs, MatchesFilenamesInLexicographicOrder) {
    TempDir tmp;
    make_layout(tmp.path(), {"b.png", "a.png"}, {"a.png", "b.png"});
    auto m = load_pairs(tmp.path());
    EXPECT_EQ(m.ids, (std::vector<std::string>{"a.png", "b.png"}));
    EXPECT_EQ(m.low_path("a.png"), tmp.path() / "low" / "a.png");
}

TEST(LoadPairs, MissingCounterpartNamesFile) {
    TempDir tmp;
    make_layout(tmp.path(), {"a.png"}, {});
    try {
        load_pairs(tmp.path());
        FAIL() << "expected DatasetError";
    } catch (const DatasetError& e) {
        EXPECT_NE(std::string(e.what()).find("a.png"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("missing counterpart"), std::string::npos);
    }
}

TEST(LoadPairs, EmptyDirectoriesGiveEmptyManifest) {
    TempDir tmp;
    make_layout(tmp.path(), {}, {});
    EXPECT_TRUE(load_pairs(tmp.path()).ids.empty());
}

TEST(LoadPairs, UndecodableImageIsFormatError) {
    TempDir tmp;
    make_layout(tmp.path(), {"a.png"}, {});
    fs::create_directories(tmp.path() / "normal");
    std::ofstream(tmp.path() / "normal" / "a.png") << "not a png";
    EXPECT_THROW(load_pairs(tmp.path()), FormatError);
}

TEST(LoadPairs, MissingRootIsIoError) {
    EXPECT_THROW(load_pairs("/nonexistent/cidn/root"), IoError);
}

TEST(Misalignment, ZeroShiftIsIdentity) {
    auto img = gradient(32, 40);
    Rng rng(1);
    auto [out, shift] = simulate_misalignment(img, 0, rng);
    EXPECT_TRUE(out == img);
    EXPECT_EQ(shift.dx, 0);
    EXPECT_EQ(shift.dy, 0);
}

TEST(Misalignment, InteriorIndexOracle) {
    auto img = gradient(32, 40);
    auto out = translate(img, {3, -2});
    // out(x, y) = in(x - dx, y - dy)
    for (int64_t y = 2; y < 30; ++y)
        for (int64_t x = 3; x < 37; ++x)
            for (int64_t c = 0; c < 3; ++c)
                ASSERT_EQ(out.at(c, y, x), img.at(c, y + 2, x - 3)) << y << "," << x;
    EXPECT_EQ(out.height(), 32);
    EXPECT_EQ(out.width(), 40);
}

TEST(Misalignment, BorderIsReflected) {
    auto img = gradient(16, 16);
    auto out = translate(img, {2, 0});
    // Columns 0,1 mirror columns 2,1 of the source without repeating the edge.
    EXPECT_EQ(out.at(0, 5, 0), img.at(0, 5, 2));
    EXPECT_EQ(out.at(0, 5, 1), img.at(0, 5, 1));
}

TEST(Misalignment, ShiftsStayInRangeAndRejectBadBound) {
    auto img = gradient(32, 32);
    Rng rng(3);
    bool saw_extreme = false;
    for (int i = 0; i < 200; ++i) {
        auto [out, s] = simulate_misalignment(img, 10, rng);
        EXPECT_LE(std::abs(s.dx), 10);
        EXPECT_LE(std::abs(s.dy), 10);
        saw_extreme |= std::abs(s.dx) == 10;
    }
    EXPECT_TRUE(saw_extreme);
    EXPECT_THROW(simulate_misalignment(img, 16, rng), std::invalid_argument);
    EXPECT_THROW(simulate_misalignment(img, -1, rng), std::invalid_argument);
}

TEST(Noise, GaussianContracts) {
    auto img = gradient(32, 32);
    Rng rng(4);
    EXPECT_TRUE(add_gaussian_noise(img, 0.0, rng) == img);
    auto noisy = add_gaussian_noise(img, 50.0, rng);
    EXPECT_GE(noisy.tensor().min().item<float>(), 0.0f);
    EXPECT_LE(noisy.tensor().max().item<float>(), 1.0f);
    EXPECT_THROW(add_gaussian_noise(img, -1.0, rng), std::invalid_argument);
}

TEST(Noise, PoissonContracts) {
    Rng rng(5);
    auto zero = Image::constant(16, 16, 0.0f);
    EXPECT_TRUE(add_poisson_noise(zero, 10.0, rng) == zero);
    EXPECT_THROW(add_poisson_noise(zero, 0.0, rng), std::invalid_argument);
    auto bright = add_poisson_noise(Image::constant(16, 16, 0.95f), 10.0, rng);
    EXPECT_LE(bright.tensor().max().item<float>(), 1.0f);
}

TEST(Noise, CommutesWithCropOnInteriors) {
    auto img = gradient(48, 48);
    const CropWindow w{8, 4, 24};
    auto a = crop(translate(img, {2, 3}), w);
    auto b = translate(crop(img, w), {2, 3});
    for (int64_t y = 3; y < 24; ++y)
        for (int64_t x = 2; x < 24; ++x)
            ASSERT_EQ(a.at(1, y, x), b.at(1, y, x));
}

PairSource toy_source(int n, int64_t size, CorruptionRecipe recipe = {}) {
    std::vector<ImagePair> pairs;
    for (int i = 0; i < n; ++i) {
        auto normal = toy::scene(size, 9, static_cast<uint64_t>(i));
        pairs.push_back({toy::darkened(normal, 0.2), normal, "p" + std::to_string(i)});
    }
    return PairSource(std::move(pairs), recipe);
}

TEST(SampleBatch, SharedWindowAndFlip) {
    auto src = toy_source(3, 64);
    for (int64_t step = 0; step < 10; ++step) {
        for (const auto& item : sample_batch(src, 4, 32, 1, step)) {
            const auto& pair = src.pairs()[item.source_index];
            auto low = crop(pair.low, item.window), normal = crop(pair.normal, item.window);
            if (item.flipped) {
                low = flip_horizontal(low);
                normal = flip_horizontal(normal);
            }
            EXPECT_TRUE(item.patch.low == low);
            EXPECT_TRUE(item.patch.normal == normal);
        }
    }
}

TEST(SampleBatch, FlipsBothOrNeither) {
    auto src = toy_source(1, 64);
    int flipped = 0, total = 0;
    for (int64_t step = 0; step < 50; ++step)
        for (const auto& item : sample_batch(src, 2, 64, 2, step)) {
            ++total;
            flipped += item.flipped;
        }
    EXPECT_GT(flipped, 0);
    EXPECT_LT(flipped, total);
}

TEST(SampleBatch, Deterministic) {
    auto src = toy_source(2, 64, {4, NoiseKind::gaussian, 5.0});
    auto a = sample_batch(src, 3, 32, 7, 5), b = sample_batch(src, 3, 32, 7, 5);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(a[i].patch.low == b[i].patch.low);
        EXPECT_TRUE(a[i].patch.normal == b[i].patch.normal);
    }
    auto c = sample_batch(src, 3, 32, 7, 6);
    EXPECT_FALSE(a[0].patch.low == c[0].patch.low && a[0].window.x == c[0].window.x && a[0].window.y == c[0].window.y);
}

TEST(SampleBatch, DegenerateAndOversizedWindows) {
    std::vector<ImagePair> pairs{{Image::constant(64, 96, 0.1f), Image::constant(64, 96, 0.5f), "wide"}};
    PairSource src(pairs, {});
    for (int64_t step = 0; step < 5; ++step)
        EXPECT_EQ(sample_batch(src, 1, 64, 0, step)[0].window.y, 0);
    EXPECT_THROW(sample_batch(src, 1, 68, 0, 0), ShapeError);
    EXPECT_THROW(sample_batch(src, 1, 30, 0, 0), ShapeError);
}

TEST(SampleBatch, MisalignmentIsPerPairPerEpoch) {
    auto src = toy_source(2, 64, {6, NoiseKind::none, 0.0});
    // batch 1 over 2 pairs: steps 0 and 1 are epoch 0; steps 2 and 3 are epoch 1.
    std::map<std::pair<size_t, int>, std::pair<int64_t, int64_t>> seen;
    for (int64_t step = 0; step < 40; ++step) {
        const auto item = sample_batch(src, 1, 64, 3, step)[0];
        const int epoch = static_cast<int>(step / 2);
        auto key = std::make_pair(item.source_index, epoch);
        auto shift = std::make_pair(item.shift.dx, item.shift.dy);
        auto [it, fresh] = seen.emplace(key, shift);
        if (!fresh)
            EXPECT_EQ(it->second, shift);
    }
}

} // namespace
} // namespace cidn::data
