/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file metrics.hpp
 * @brief Full-reference quality metrics, luminance histograms and evaluation reports.
 *
 * PSNR is computed on the RGB mean squared error with peak 1. SSIM is the mean
 * of the local SSIM map over the luminance channel, using an 11x11 Gaussian
 * window (sigma 1.5) evaluated only where the window fits entirely inside the
 * image, with C1 = 0.01^2 and C2 = 0.03^2.
 */

#pragma once

#include "cidn/data.hpp"
#include "cidn/image.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace cidn::metrics {

constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();
constexpr int64_t kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimC1 = 1e-4;
constexpr double kSsimC2 = 9e-4;

/// dB; +inf when the images are identical. Throws ShapeError on shape mismatch.
double psnr(const Image& a, const Image& b);

/// Throws ShapeError on shape mismatch or when either side is < 11 pixels.
double ssim(const Image& a, const Image& b);

/// Per-pixel luminance histogram normalised to sum 1; bin = min(floor(l * bins), bins - 1).
/// Throws std::invalid_argument when bins < 2, ShapeError for an empty image.
std::vector<double> luminance_histogram(const Image& image, int bins = 256);

/// Histogram intersection. Throws std::invalid_argument on bin-count mismatch.
double histogram_alignment(const std::vector<double>& h1, const std::vector<double>& h2);

struct ImageScore {
    std::string id;
    double psnr = 0.0;
    double ssim = 0.0;
    double alignment = 0.0; ///< output vs guidance luminance histograms
};

struct EvalReport {
    std::vector<ImageScore> rows;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double mean_alignment = 0.0;
};

/// Anything mapping (low, guidance) to an enhanced image.
using Enhancer = std::function<Image(const Image& low, const Image& guidance)>;

/// Returns the guidance unchanged; with paired guidance this is the ground truth.
Enhancer oracle_enhancer();
/// Returns the low-light input unchanged.
Enhancer identity_enhancer();

/// Enhances every pair (guided by its own normal image, or by `guidance` when
/// non-empty) and scores the result against the normal image. Rows follow
/// input order. Throws DatasetError when `pairs` is empty.
EvalReport evaluate(const std::vector<data::ImagePair>& pairs, const Enhancer& enhancer, const Image& guidance = {});

/// Recomputes means from rows (arithmetic average; infinite PSNRs propagate).
void finalize(EvalReport& report);

/// CSV `id,psnr,ssim,alignment`, one row per image, then a `mean` row.
void write_report(const EvalReport& report, std::ostream& out);
void write_report(const EvalReport& report, const std::filesystem::path& path);

/// Human-readable table.
void print_report(const EvalReport& report, std::ostream& out);

} // namespace cidn::metrics
