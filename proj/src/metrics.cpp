/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/metrics.hpp"
#include "cidn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace cidn::metrics {

namespace {

void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (a.empty() || b.empty())
        throw ShapeError(std::string(what) + ": empty image");
    if (a.height() != b.height() || a.width() != b.width())
        throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.height()) + "x" +
                         std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                         std::to_string(b.width()));
}

/// Separable, normalised 1-D Gaussian, float64.
torch::Tensor gaussian_kernel() {
    std::vector<double> k(kSsimWindow);
    const double c = (kSsimWindow - 1) / 2.0;
    double sum = 0.0;
    for (int64_t i = 0; i < kSsimWindow; ++i) {
        const double d = static_cast<double>(i) - c;
        k[static_cast<size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += k[static_cast<size_t>(i)];
    }
    for (auto& v : k)
        v /= sum;
    return torch::tensor(k, torch::kFloat64);
}

/// Valid-region Gaussian filter of a [H,W] map.
torch::Tensor filter(const torch::Tensor& map, const torch::Tensor& k) {
    auto x = map.view({1, 1, map.size(0), map.size(1)});
    x = torch::conv2d(x, k.view({1, 1, kSsimWindow, 1}));
    x = torch::conv2d(x, k.view({1, 1, 1, kSsimWindow}));
    return x.squeeze(0).squeeze(0);
}

std::string fmt(double v) {
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

} // namespace

double psnr(const Image& a, const Image& b) {
    require_same_shape(a, b, "psnr");
    const double mse =
        (a.tensor().to(torch::kFloat64) - b.tensor().to(torch::kFloat64)).square().mean().item<double>();
    if (mse == 0.0)
        return kInfinitePsnr;
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
    require_same_shape(a, b, "ssim");
    if (a.height() < kSsimWindow || a.width() < kSsimWindow)
        throw ShapeError("ssim: image smaller than the 11x11 window");
    static const auto k = gaussian_kernel();
    const auto x = a.luminance();
    const auto y = b.luminance();
    const auto mx = filter(x, k);
    const auto my = filter(y, k);
    const auto sxx = filter(x * x, k) - mx * mx;
    const auto syy = filter(y * y, k) - my * my;
    const auto sxy = filter(x * y, k) - mx * my;
    const auto map = ((2 * mx * my + kSsimC1) * (2 * sxy + kSsimC2)) /
                     ((mx * mx + my * my + kSsimC1) * (sxx + syy + kSsimC2));
    return map.mean().item<double>();
}

std::vector<double> luminance_histogram(const Image& image, int bins) {
    if (bins < 2)
        throw std::invalid_argument("histogram needs at least 2 bins");
    if (image.empty())
        throw ShapeError("histogram of an empty image");
    const auto lum = image.luminance().contiguous();
    const auto* l = lum.data_ptr<double>();
    const auto n = lum.numel();
    std::vector<double> h(static_cast<size_t>(bins), 0.0);
    // The Rec.601 weights sum to 1 - 1ulp in double; nudge so gray levels that sit
    // exactly on a bin edge land in the bin they open.
    constexpr double kEdgeSlack = 1e-9;
    for (int64_t i = 0; i < n; ++i) {
        const auto bin = std::min(static_cast<int64_t>(std::floor(l[i] * bins + kEdgeSlack)), static_cast<int64_t>(bins - 1));
        h[static_cast<size_t>(std::max<int64_t>(bin, 0))] += 1.0;
    }
    for (auto& v : h)
        v /= static_cast<double>(n);
    return h;
}

double histogram_alignment(const std::vector<double>& h1, const std::vector<double>& h2) {
    if (h1.size() != h2.size())
        throw std::invalid_argument("histogram bin counts differ: " + std::to_string(h1.size()) + " vs " +
                                    std::to_string(h2.size()));
    double s = 0.0;
    for (size_t i = 0; i < h1.size(); ++i)
        s += std::min(h1[i], h2[i]);
    return std::clamp(s, 0.0, 1.0);
}

Enhancer oracle_enhancer() {
    return [](const Image&, const Image& guidance) { return guidance; };
}

Enhancer identity_enhancer() {
    return [](const Image& low, const Image&) { return low; };
}

EvalReport evaluate(const std::vector<data::ImagePair>& pairs, const Enhancer& enhancer, const Image& guidance) {
    if (pairs.empty())
        throw DatasetError("no pairs to evaluate");
    EvalReport report;
    for (const auto& pair : pairs) {
        if (pair.normal.empty())
            throw DatasetError("pair '" + pair.id + "' has no ground truth");
        const Image& guide = guidance.empty() ? pair.normal : guidance;
        const Image out = enhancer(pair.low, guide);
        ImageScore row;
        row.id = pair.id;
        row.psnr = psnr(out, pair.normal);
        row.ssim = ssim(out, pair.normal);
        row.alignment = histogram_alignment(luminance_histogram(out), luminance_histogram(guide));
        report.rows.push_back(std::move(row));
    }
    finalize(report);
    return report;
}

void finalize(EvalReport& report) {
    double p = 0.0, s = 0.0, a = 0.0;
    for (const auto& r : report.rows) {
        p += r.psnr;
        s += r.ssim;
        a += r.alignment;
    }
    const auto n = static_cast<double>(std::max<size_t>(report.rows.size(), 1));
    report.mean_psnr = p / n;
    report.mean_ssim = s / n;
    report.mean_alignment = a / n;
}

void write_report(const EvalReport& report, std::ostream& out) {
    out << "id,psnr,ssim,alignment\n";
    for (const auto& r : report.rows)
        out << r.id << ',' << fmt(r.psnr) << ',' << fmt(r.ssim) << ',' << fmt(r.alignment) << '\n';
    out << "mean," << fmt(report.mean_psnr) << ',' << fmt(report.mean_ssim) << ',' << fmt(report.mean_alignment)
        << '\n';
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write report '" + path.string() + "'");
    write_report(report, out);
}

void print_report(const EvalReport& report, std::ostream& out) {
    char line[256];
    std::snprintf(line, sizeof(line), "%-24s %10s %8s %9s\n", "id", "PSNR(dB)", "SSIM", "align");
    out << line;
    for (const auto& r : report.rows) {
        std::snprintf(line, sizeof(line), "%-24s %10s %8.4f %9.4f\n", r.id.c_str(), fmt(r.psnr).c_str(), r.ssim,
                      r.alignment);
        out << line;
    }
    std::snprintf(line, sizeof(line), "%-24s %10s %8.4f %9.4f\n", "mean", fmt(report.mean_psnr).c_str(),
                  report.mean_ssim, report.mean_alignment);
    out << line;
}

} // namespace cidn::metrics
