/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file train.hpp
 * @brief Alternating discriminator / generator optimisation of the hybrid objective.
 *
 * One train step runs a single generator forward pass, updates both
 * discriminator sets on the detached swapped outputs, then updates the
 * encoders and decoders on the weighted loss scored by the refreshed
 * discriminators. All randomness inside a step derives from (seed, step), so
 * training resumed from a checkpoint replays the uninterrupted run bit for bit.
 */

#pragma once

#include "cidn/config.hpp"
#include "cidn/data.hpp"
#include "cidn/losses.hpp"
#include "cidn/model.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cidn {

ModelState init_model(const TrainConfig& config);

/// In-place Adam step on `params` using their .grad(); t is the 1-based update count.
void adam_update(const NamedTensors& params, AdamMoments& moments, int64_t t, const TrainConfig& config);

/// Runs one discriminator update and one generator update on a batch of
/// [N,3,P,P] low/normal tensors; increments state.step. Throws TrainingError
/// naming the first non-finite loss component.
losses::LossReport train_step(const torch::Tensor& low, const torch::Tensor& normal, ModelState& state,
                              const TrainConfig& config, const losses::FeatureExtractor& extractor);

losses::LossReport train_step(const std::vector<data::BatchItem>& batch, ModelState& state, const TrainConfig& config,
                              const losses::FeatureExtractor& extractor);

/// `step, rec_x, rec_y, con, kl_x, kl_y, per_x, per_y, adv_g, adv_d, total`
std::string metrics_header();
std::string metrics_line(int64_t step, const losses::LossReport& report);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, int64_t step);

struct TrainOptions {
    std::filesystem::path output_dir;
    /// Empty: no metrics log.
    std::filesystem::path metrics_log;
    /// Continue from this checkpoint instead of a fresh init_model().
    std::optional<std::filesystem::path> resume_from;
    std::function<void(int64_t step, const losses::LossReport&)> on_step;
};

struct TrainResult {
    std::filesystem::path final_checkpoint;
    std::vector<losses::LossReport> reports;
};

/// Trains until state.step == config.max_steps, writing a checkpoint at step 0
/// (fresh runs only), every checkpoint_interval steps, and at the end.
TrainResult train(const data::PairSource& source, const TrainConfig& config, const TrainOptions& options);

} // namespace cidn
