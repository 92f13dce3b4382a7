/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file losses.hpp
 * @brief Training objective: content consistency, reconstruction, KL,
 *        perceptual and multi-scale adversarial terms, and their weighted sum.
 *
 * Every term reduces by mean over elements, so magnitudes do not depend on
 * resolution. The elementwise terms are autograd functions with closed-form
 * backward passes; they work in float32 and float64 alike.
 */

#pragma once

#include "cidn/model.hpp"

#include <torch/torch.h>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace cidn::losses {

struct LossWeights {
    double w1 = 1.0;   ///< content consistency (0.2 for noisy low-light data)
    double w2 = 0.001; ///< KL, both domains
    double w3 = 0.1;   ///< perceptual, both domains
    double w4 = 1.0;   ///< adversarial (generator side), both domains

    /// Throws std::invalid_argument on a negative or non-finite weight.
    void validate() const;
};

struct LossReport {
    double rec_x = 0, rec_y = 0;
    double con = 0;
    double kl_x = 0, kl_y = 0;
    double per_x = 0, per_y = 0;
    double adv_g_x = 0, adv_g_y = 0;
    double adv_d_x = 0, adv_d_y = 0;
    /// Cross-cycle reconstruction terms; zero unless that ablation is enabled.
    double cyc_x = 0, cyc_y = 0;
    double total = 0;
};

/// rec_x + rec_y + w1 con + w2 (kl_x + kl_y) + w3 (per_x + per_y) + w4 (adv_g_x + adv_g_y) + cyc_x + cyc_y.
/// Throws std::invalid_argument on negative weights and std::domain_error on non-finite components.
double total_loss(const LossReport& components, const LossWeights& weights);

// -- Tensor terms (differentiable) ----------------------------------------------------

/// mean |a - b| with a closed-form backward.
torch::Tensor mean_abs_diff(const torch::Tensor& a, const torch::Tensor& b);

torch::Tensor content_consistency(const torch::Tensor& cx, const torch::Tensor& cy);
torch::Tensor reconstruction_l1(const torch::Tensor& pred, const torch::Tensor& target);

/// Batch mean of sum_d 0.5 (mu_d^2 + exp(logvar_d) - logvar_d - 1). Inputs [N,D] or [D].
torch::Tensor kl_gaussian(const torch::Tensor& mu, const torch::Tensor& logvar);

/// sum_k mean(-log real_k - log(1 - fake_k)) over the three scales.
torch::Tensor adversarial_d(std::span<const torch::Tensor> real, std::span<const torch::Tensor> fake);

/// sum_k mean(-log fake_k); the non-saturating generator form.
torch::Tensor adversarial_g(std::span<const torch::Tensor> fake);

// -- Perceptual ---------------------------------------------------------------------

enum class ExtractorSource { seeded_random, external_pretrained };

/**
 * Frozen convolutional feature pyramid whose activations feed the perceptual
 * loss. The seeded variant is a three-stage network with He-normal weights
 * drawn from a seed; the pretrained variant is the first three VGG-16 blocks
 * tapped at relu1_2, relu2_2 and relu3_3, loaded from a weight container.
 */
class FeatureExtractor {
public:
    static FeatureExtractor seeded(uint64_t seed);

    /// Loads conv{1_1,1_2,2_1,2_2,3_1,3_2,3_3}.{weight,bias} from a CIDN container file.
    static FeatureExtractor vgg16(const std::filesystem::path& weights);

    /// Tapped activations for [N,3,H,W] inputs in [0,1].
    std::vector<torch::Tensor> features(const torch::Tensor& images) const;

    /// Copy with weights cast to dtype (double precision for gradient checks).
    FeatureExtractor to(torch::ScalarType dtype) const;

    size_t num_taps() const;
    ExtractorSource source() const { return source_; }

    struct Layer {
        torch::Tensor weight;
        torch::Tensor bias;
        bool pool_before = false;
        bool tap_after = false;
    };
    const std::vector<Layer>& layers() const { return layers_; }
    bool normalizes_input() const { return imagenet_normalize_; }

private:
    std::vector<Layer> layers_;
    ExtractorSource source_ = ExtractorSource::seeded_random;
    bool imagenet_normalize_ = false;
};

/// sum_n (1/K_n) ||phi_n(a) - phi_n(b)||_1, K_n the activation count of tap n.
torch::Tensor perceptual(const torch::Tensor& a, const torch::Tensor& b, const FeatureExtractor& fx);

// -- Conveniences on domain types -------------------------------------------------------

double content_consistency(const ContentFeature& cx, const ContentFeature& cy);
double reconstruction_l1(const Image& pred, const Image& target);
double kl_gaussian(const BrightnessPosterior& posterior);
double perceptual(const Image& a, const Image& b, const FeatureExtractor& fx);

} // namespace cidn::losses
