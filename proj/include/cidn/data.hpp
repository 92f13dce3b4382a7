/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file data.hpp
 * @brief Paired low/normal-light datasets, corruption simulators and patch batches.
 *
 * Dataset layout: <root>/low/<id>.png and <root>/normal/<id>.png. Every batch
 * is a pure function of (pairs, recipe, seed, step): each random decision is
 * drawn from an Rng derived from those coordinates.
 */

#pragma once

#include "cidn/image.hpp"
#include "cidn/rng.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace cidn::data {

struct ImagePair {
    Image low;
    Image normal;
    std::string id;
};

enum class NoiseKind { none, gaussian, poisson };

struct CorruptionRecipe {
    /// Misalignment bound in pixels applied to the normal-light image; 0 disables it.
    int64_t max_shift = 0;
    NoiseKind noise = NoiseKind::none;
    /// Gaussian sigma in 8-bit units, or Poisson lambda.
    double level = 0.0;

    void validate() const;
};

enum class Split { train, eval };

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<std::string> ids; ///< lexicographic
    Split split = Split::train;
    CorruptionRecipe recipe;

    std::filesystem::path low_path(const std::string& id) const;
    std::filesystem::path normal_path(const std::string& id) const;
    size_t size() const { return ids.size(); }
};

/// Matches <root>/low/*.png against <root>/normal/*.png by filename.
/// Throws IoError when root or a subdirectory is missing, DatasetError for an
/// unmatched file or mismatched dimensions, FormatError for undecodable data.
DatasetManifest load_pairs(const std::filesystem::path& root, Split split = Split::train);

std::vector<ImagePair> load_images(const DatasetManifest& manifest);

/// Integer translation. out(x, y) = in(x - dx, y - dy) with x the column and
/// y the row; samples that fall outside are reflected back (mirror without
/// repeating the edge).
struct Shift {
    int64_t dx = 0;
    int64_t dy = 0;
    bool operator==(const Shift&) const = default;
};

Image translate(const Image& image, Shift shift);

/// Draws (dx, dy) uniformly from [-max_shift, max_shift]^2 and translates.
/// Requires 0 <= max_shift < min(H, W) / 2.
std::pair<Image, Shift> simulate_misalignment(const Image& image, int64_t max_shift, Rng& rng);

/// clip(img + n, 0, 1), n ~ N(0, (sigma_8bit / 255)^2) per element.
Image add_gaussian_noise(const Image& image, double sigma_8bit, Rng& rng);

/// clip(Poisson(img * lam) / lam, 0, 1) per element.
Image add_poisson_noise(const Image& image, double lam, Rng& rng);

/// Applies the recipe's noise (if any) to an image.
Image apply_noise(const Image& image, const CorruptionRecipe& recipe, Rng& rng);

struct CropWindow {
    int64_t x = 0;
    int64_t y = 0;
    int64_t size = 0;
    bool operator==(const CropWindow&) const = default;
};

Image crop(const Image& image, const CropWindow& window);
Image flip_horizontal(const Image& image);

struct BatchItem {
    ImagePair patch;
    size_t source_index = 0;
    CropWindow window;
    bool flipped = false;
    Shift shift; ///< misalignment applied to the normal image before cropping
};

/// In-memory pairs plus the corruption recipe applied when sampling.
class PairSource {
public:
    explicit PairSource(const DatasetManifest& manifest);
    PairSource(std::vector<ImagePair> pairs, CorruptionRecipe recipe);

    const std::vector<ImagePair>& pairs() const { return pairs_; }
    const CorruptionRecipe& recipe() const { return recipe_; }
    size_t size() const { return pairs_.size(); }

private:
    std::vector<ImagePair> pairs_;
    CorruptionRecipe recipe_;
};

/**
 * Samples `batch` pairs with replacement. For each, the misalignment for the
 * current epoch (one offset per pair per epoch) is applied to the normal
 * image, one crop window and one flip decision are drawn and applied to both
 * images, then the recipe's noise is added to the low-light patch.
 * Requires patch <= min edge and patch divisible by 4.
 */
std::vector<BatchItem> sample_batch(const PairSource& source, int64_t batch, int64_t patch, uint64_t seed, int64_t step);

/// Stacks a batch into ([N,3,P,P] low, [N,3,P,P] normal).
std::pair<torch::Tensor, torch::Tensor> stack(const std::vector<BatchItem>& items);

} // namespace cidn::data
