/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/data.hpp"
#include "cidn/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace cidn::data {

namespace fs = std::filesystem;

namespace {

bool is_png(const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png";
}

std::set<std::string> png_names(const fs::path& dir) {
    if (!fs::is_directory(dir))
        throw IoError("dataset directory '" + dir.string() + "' does not exist");
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && is_png(entry.path()))
            names.insert(entry.path().filename().string());
    return names;
}

/// Mirror index into [0, n) without repeating the edge sample.
torch::Tensor reflect_indices(int64_t n, int64_t offset) {
    std::vector<int64_t> idx(static_cast<size_t>(n));
    const int64_t period = 2 * (n - 1);
    for (int64_t i = 0; i < n; ++i) {
        int64_t j = i - offset;
        if (period > 0) {
            j = ((j % period) + period) % period;
            if (j >= n)
                j = period - j;
        } else {
            j = 0;
        }
        idx[static_cast<size_t>(i)] = j;
    }
    return torch::tensor(idx, torch::kInt64);
}

} // namespace

void CorruptionRecipe::validate() const {
    if (max_shift < 0)
        throw std::invalid_argument("max_shift must be >= 0");
    switch (noise) {
    case NoiseKind::none: break;
    case NoiseKind::gaussian:
        if (!(level >= 0.0) || !std::isfinite(level))
            throw std::invalid_argument("gaussian sigma must be >= 0");
        break;
    case NoiseKind::poisson:
        if (!(level > 0.0) || !std::isfinite(level))
            throw std::invalid_argument("poisson lambda must be > 0");
        break;
    }
}

fs::path DatasetManifest::low_path(const std::string& id) const {
    return root / "low" / id;
}

fs::path DatasetManifest::normal_path(const std::string& id) const {
    return root / "normal" / id;
}

DatasetManifest load_pairs(const fs::path& root, Split split) {
    if (!fs::is_directory(root))
        throw IoError("dataset root '" + root.string() + "' does not exist");
    const auto low = png_names(root / "low");
    const auto normal = png_names(root / "normal");
    for (const auto& name : low)
        if (!normal.count(name))
            throw DatasetError("missing counterpart: " + (root / "low" / name).string() + " has no " +
                               (root / "normal" / name).string());
    for (const auto& name : normal)
        if (!low.count(name))
            throw DatasetError("missing counterpart: " + (root / "normal" / name).string() + " has no " +
                               (root / "low" / name).string());

    DatasetManifest manifest;
    manifest.root = root;
    manifest.split = split;
    manifest.ids.assign(low.begin(), low.end());
    for (const auto& id : manifest.ids) {
        auto a = read_image(manifest.low_path(id));
        auto b = read_image(manifest.normal_path(id));
        if (a.height() != b.height() || a.width() != b.width())
            throw DatasetError("pair '" + id + "' has mismatched dimensions");
    }
    return manifest;
}

std::vector<ImagePair> load_images(const DatasetManifest& manifest) {
    std::vector<ImagePair> pairs;
    pairs.reserve(manifest.size());
    for (const auto& id : manifest.ids)
        pairs.push_back({read_image(manifest.low_path(id)), read_image(manifest.normal_path(id)), id});
    return pairs;
}

Image translate(const Image& image, Shift shift) {
    if (shift.dx == 0 && shift.dy == 0)
        return image;
    auto cols = reflect_indices(image.width(), shift.dx);
    auto rows = reflect_indices(image.height(), shift.dy);
    return Image(image.tensor().index_select(2, cols).index_select(1, rows));
}

std::pair<Image, Shift> simulate_misalignment(const Image& image, int64_t max_shift, Rng& rng) {
    const auto limit = std::min(image.height(), image.width());
    if (max_shift < 0 || 2 * max_shift >= limit)
        throw std::invalid_argument("max_shift " + std::to_string(max_shift) + " out of range [0, " +
                                    std::to_string(limit) + "/2)");
    Shift shift;
    shift.dx = rng.uniform_int(-max_shift, max_shift);
    shift.dy = rng.uniform_int(-max_shift, max_shift);
    return {translate(image, shift), shift};
}

Image add_gaussian_noise(const Image& image, double sigma_8bit, Rng& rng) {
    if (!(sigma_8bit >= 0.0))
        throw std::invalid_argument("gaussian sigma must be >= 0");
    if (sigma_8bit == 0.0)
        return image;
    auto noise = rng.normal_tensor(image.tensor().sizes(), 0.0, sigma_8bit / 255.0, torch::kFloat64);
    return Image((image.tensor().to(torch::kFloat64) + noise).clamp(0.0, 1.0));
}

Image add_poisson_noise(const Image& image, double lam, Rng& rng) {
    if (!(lam > 0.0))
        throw std::invalid_argument("poisson lambda must be > 0");
    auto src = image.tensor().to(torch::kFloat64).contiguous();
    auto out = torch::empty_like(src);
    const auto* in = src.data_ptr<double>();
    auto* o = out.data_ptr<double>();
    for (int64_t i = 0, n = src.numel(); i < n; ++i)
        o[i] = std::min(1.0, static_cast<double>(rng.poisson(in[i] * lam)) / lam);
    return Image(out);
}

Image apply_noise(const Image& image, const CorruptionRecipe& recipe, Rng& rng) {
    switch (recipe.noise) {
    case NoiseKind::gaussian: return add_gaussian_noise(image, recipe.level, rng);
    case NoiseKind::poisson: return add_poisson_noise(image, recipe.level, rng);
    case NoiseKind::none: break;
    }
    return image;
}

Image crop(const Image& image, const CropWindow& w) {
    if (w.x < 0 || w.y < 0 || w.x + w.size > image.width() || w.y + w.size > image.height())
        throw ShapeError("crop window outside image");
    return Image(image.tensor().narrow(1, w.y, w.size).narrow(2, w.x, w.size));
}

Image flip_horizontal(const Image& image) {
    return Image(image.tensor().flip({2}));
}

PairSource::PairSource(const DatasetManifest& manifest) : pairs_(load_images(manifest)), recipe_(manifest.recipe) {
    recipe_.validate();
}

PairSource::PairSource(std::vector<ImagePair> pairs, CorruptionRecipe recipe)
    : pairs_(std::move(pairs)), recipe_(recipe) {
    recipe_.validate();
    for (const auto& p : pairs_)
        if (p.low.height() != p.normal.height() || p.low.width() != p.normal.width())
            throw DatasetError("pair '" + p.id + "' has mismatched dimensions");
}

std::vector<BatchItem> sample_batch(const PairSource& source, int64_t batch, int64_t patch, uint64_t seed, int64_t step) {
    if (batch < 1)
        throw std::invalid_argument("batch must be >= 1");
    if (source.size() == 0)
        throw DatasetError("cannot sample from an empty dataset");
    if (patch < 1 || patch % 4 != 0)
        throw ShapeError("patch " + std::to_string(patch) + " must be a positive multiple of 4");

    const auto n = static_cast<int64_t>(source.size());
    const auto epoch = static_cast<uint64_t>((step * batch) / n);
    auto rng = Rng::derive(seed, Stream::batch, static_cast<uint64_t>(step));

    std::vector<BatchItem> items;
    items.reserve(static_cast<size_t>(batch));
    for (int64_t slot = 0; slot < batch; ++slot) {
        BatchItem item;
        item.source_index = static_cast<size_t>(rng.uniform_int(0, n - 1));
        const auto& pair = source.pairs()[item.source_index];
        const auto h = pair.low.height();
        const auto w = pair.low.width();
        if (patch > std::min(h, w))
            throw ShapeError("patch " + std::to_string(patch) + " too large for " + std::to_string(h) + "x" +
                             std::to_string(w) + " image '" + pair.id + "'");
        item.window = {rng.uniform_int(0, w - patch), rng.uniform_int(0, h - patch), patch};
        item.flipped = rng.bernoulli(0.5);

        Image normal = pair.normal;
        if (source.recipe().max_shift > 0) {
            auto shift_rng = Rng::derive(seed, Stream::misalign, item.source_index, epoch);
            std::tie(normal, item.shift) = simulate_misalignment(normal, source.recipe().max_shift, shift_rng);
        }
        Image low = crop(pair.low, item.window);
        normal = crop(normal, item.window);
        if (item.flipped) {
            low = flip_horizontal(low);
            normal = flip_horizontal(normal);
        }
        auto noise_rng = Rng::derive(seed, Stream::noise, static_cast<uint64_t>(step), static_cast<uint64_t>(slot));
        low = apply_noise(low, source.recipe(), noise_rng);
        item.patch = {std::move(low), std::move(normal), pair.id};
        items.push_back(std::move(item));
    }
    return items;
}

std::pair<torch::Tensor, torch::Tensor> stack(const std::vector<BatchItem>& items) {
    std::vector<torch::Tensor> low, normal;
    for (const auto& item : items) {
        low.push_back(item.patch.low.tensor());
        normal.push_back(item.patch.normal.tensor());
    }
    return {torch::stack(low), torch::stack(normal)};
}

} // namespace cidn::data
