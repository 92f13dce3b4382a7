/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/image.hpp"
#include "cidn/errors.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <vector>

namespace cidn {

namespace {

torch::Tensor luminance_weights(torch::ScalarType dtype) {
    return torch::tensor({0.299, 0.587, 0.114}, torch::TensorOptions().dtype(dtype)).view({3, 1, 1});
}

} // namespace

Image::Image(torch::Tensor chw) {
    if (chw.dim() == 4 && chw.size(0) == 1)
        chw = chw.squeeze(0);
    if (chw.dim() != 3 || chw.size(0) != 3)
        throw ShapeError("image tensor must be [3,H,W], got " + std::string(c10::str(chw.sizes())));
    if (!chw.is_floating_point())
        throw ShapeError("image tensor must be floating point");
    auto t = chw.detach().to(torch::kCPU, torch::kFloat32).contiguous();
    if (t.numel() > 0) {
        if (!torch::isfinite(t).all().item<bool>())
            throw std::domain_error("image contains non-finite values");
        if (t.min().item<float>() < 0.0f || t.max().item<float>() > 1.0f)
            throw std::domain_error("image values must lie in [0,1]");
    }
    data_ = std::move(t);
}

Image Image::constant(int64_t height, int64_t width, float value) {
    return constant(height, width, value, value, value);
}

Image Image::constant(int64_t height, int64_t width, float r, float g, float b) {
    auto t = torch::empty({3, height, width}, torch::kFloat32);
    t[0].fill_(r);
    t[1].fill_(g);
    t[2].fill_(b);
    return Image(t);
}

float Image::at(int64_t channel, int64_t y, int64_t x) const {
    return data_.accessor<float, 3>()[channel][y][x];
}

torch::Tensor Image::luminance() const {
    auto d = data_.to(torch::kFloat64);
    return (d * luminance_weights(torch::kFloat64)).sum(0);
}

double Image::mean_luminance() const {
    if (empty())
        return 0.0;
    return luminance().mean().item<double>();
}

Image Image::scaled(float gain) const {
    return Image((data_ * gain).clamp(0.0, 1.0));
}

bool Image::operator==(const Image& other) const {
    if (empty() || other.empty())
        return empty() == other.empty();
    return data_.sizes() == other.data_.sizes() && torch::equal(data_, other.data_);
}

Image fit_within(const Image& image, int64_t max_edge) {
    if (max_edge < 1)
        throw std::invalid_argument("max_edge must be >= 1");
    const auto longest = std::max(image.height(), image.width());
    if (longest <= max_edge)
        return image;
    const double scale = static_cast<double>(max_edge) / static_cast<double>(longest);
    const auto h = std::max<int64_t>(1, std::llround(image.height() * scale));
    const auto w = std::max<int64_t>(1, std::llround(image.width() * scale));
    namespace F = torch::nn::functional;
    auto out = F::interpolate(image.batched(), F::InterpolateFuncOptions().size(std::vector<int64_t>{h, w}).mode(torch::kArea));
    return Image(out.squeeze(0).clamp(0.0, 1.0));
}

Image decode_image(std::string_view bytes) {
    if (bytes.empty())
        throw FormatError("empty image payload");
    std::vector<uchar> buf(bytes.begin(), bytes.end());
    cv::Mat mat;
    try {
        mat = cv::imdecode(buf, cv::IMREAD_UNCHANGED | cv::IMREAD_ANYDEPTH);
    } catch (const cv::Exception& e) {
        throw FormatError(std::string("image decode failed: ") + e.what());
    }
    if (mat.empty())
        throw FormatError("image decode failed: unrecognised or corrupt data");

    double scale = 1.0;
    switch (mat.depth()) {
    case CV_8U: scale = 1.0 / 255.0; break;
    case CV_16U: scale = 1.0 / 65535.0; break;
    default: throw FormatError("unsupported pixel depth (expected 8 or 16 bit)");
    }

    cv::Mat rgb;
    switch (mat.channels()) {
    case 1: cv::cvtColor(mat, rgb, cv::COLOR_GRAY2RGB); break;
    case 3: cv::cvtColor(mat, rgb, cv::COLOR_BGR2RGB); break;
    case 4: cv::cvtColor(mat, rgb, cv::COLOR_BGRA2RGB); break;
    default: throw FormatError("unsupported channel count " + std::to_string(mat.channels()));
    }
    cv::Mat f;
    rgb.convertTo(f, CV_32FC3, scale);

    auto hwc = torch::from_blob(f.data, {f.rows, f.cols, 3}, torch::kFloat32);
    return Image(hwc.permute({2, 0, 1}).clone().clamp(0.0, 1.0));
}

Image read_image(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open image '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_image(bytes);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string encode_png(const Image& image) {
    if (image.empty())
        throw ShapeError("cannot encode an empty image");
    auto hwc = (image.tensor() * 255.0f).round().clamp(0, 255).to(torch::kUInt8).permute({1, 2, 0}).contiguous();
    cv::Mat rgb(static_cast<int>(image.height()), static_cast<int>(image.width()), CV_8UC3, hwc.data_ptr<uint8_t>());
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);
    std::vector<uchar> out;
    if (!cv::imencode(".png", bgr, out))
        throw FormatError("PNG encoding failed");
    return {out.begin(), out.end()};
}

void write_png(const Image& image, const std::filesystem::path& path) {
    auto bytes = encode_png(image);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write image '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("short write to '" + path.string() + "'");
}

bool peek_dimensions(std::string_view bytes, int64_t& height, int64_t& width) {
    auto u8 = [&](size_t i) { return static_cast<uint32_t>(static_cast<unsigned char>(bytes[i])); };
    auto be16 = [&](size_t i) { return (u8(i) << 8) | u8(i + 1); };
    auto be32 = [&](size_t i) { return (be16(i) << 16) | be16(i + 2); };

    static constexpr std::string_view png_sig("\x89PNG\r\n\x1a\n", 8);
    if (bytes.size() >= 24 && bytes.substr(0, 8) == png_sig && bytes.substr(12, 4) == "IHDR") {
        width = be32(16);
        height = be32(20);
        return true;
    }
    if (bytes.size() >= 4 && u8(0) == 0xFF && u8(1) == 0xD8) {
        size_t i = 2;
        while (i + 9 < bytes.size()) {
            if (u8(i) != 0xFF) {
                ++i;
                continue;
            }
            const uint32_t marker = u8(i + 1);
            if (marker == 0xFF) {
                ++i;
                continue;
            }
            if (marker == 0xD8 || (marker >= 0xD0 && marker <= 0xD7) || marker == 0x01) {
                i += 2;
                continue;
            }
            const uint32_t len = be16(i + 2);
            const bool sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 && marker != 0xCC;
            if (sof) {
                height = be16(i + 5);
                width = be16(i + 7);
                return true;
            }
            i += 2 + len;
        }
    }
    return false;
}

} // namespace cidn
