/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file image.hpp
 * @brief RGB intensity image in [0,1] and PNG/JPEG interchange.
 *
 * Pixels are held in a contiguous float32 tensor laid out [3, H, W] so the
 * image can be fed to the networks without a copy. Construction validates
 * the value range; every Image in the program satisfies 0 <= v <= 1.
 */

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace cidn {

class Image {
public:
    Image() = default;

    /// Takes a [3,H,W] (or [1,3,H,W]) floating tensor. Throws ShapeError on
    /// bad layout and std::domain_error on non-finite or out-of-range values.
    explicit Image(torch::Tensor chw);

    static Image constant(int64_t height, int64_t width, float value);
    static Image constant(int64_t height, int64_t width, float r, float g, float b);

    int64_t height() const { return data_.defined() ? data_.size(1) : 0; }
    int64_t width() const { return data_.defined() ? data_.size(2) : 0; }
    bool empty() const { return !data_.defined() || data_.numel() == 0; }

    /// [3,H,W] float32, contiguous.
    const torch::Tensor& tensor() const { return data_; }
    /// [1,3,H,W] view.
    torch::Tensor batched() const { return data_.unsqueeze(0); }

    float at(int64_t channel, int64_t y, int64_t x) const;

    /// Per-pixel luminance 0.299 R + 0.587 G + 0.114 B, shape [H,W], float64.
    torch::Tensor luminance() const;
    double mean_luminance() const;

    /// Multiplies every value by gain and clips to [0,1].
    Image scaled(float gain) const;

    bool operator==(const Image& other) const;

private:
    torch::Tensor data_;
};

/// Area-downsamples so the longer side is at most max_edge; smaller images are returned as is.
Image fit_within(const Image& image, int64_t max_edge);

/// Decodes PNG (8 or 16 bit) or JPEG bytes. Grayscale is replicated to RGB,
/// alpha dropped. Throws FormatError on undecodable input.
Image decode_image(std::string_view bytes);

/// Reads an image file. Throws IoError when unreadable, FormatError when undecodable.
Image read_image(const std::filesystem::path& path);

/// 8-bit RGB PNG encoding (values rounded to nearest of 256 levels).
std::string encode_png(const Image& image);

void write_png(const Image& image, const std::filesystem::path& path);

/// Image dimensions from a PNG IHDR or JPEG SOF header without decoding pixels.
/// Returns false when the format is not recognised.
bool peek_dimensions(std::string_view bytes, int64_t& height, int64_t& width);

} // namespace cidn
