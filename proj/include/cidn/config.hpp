/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file config.hpp
 * @brief Training hyper-parameters and the key/value run configuration file.
 *
 * Run configuration schema: one `key = value` per line, `#` starts a comment,
 * blank lines ignored. Relative paths resolve against the file's directory.
 *
 *     dataset_root         path    training pairs (<root>/low, <root>/normal)      required for train
 *     eval_root            path    evaluation pairs                                  default dataset_root
 *     output_dir           path    checkpoints and metrics log                       default ./run
 *     metrics_log          path    per-step loss log                                 default <output_dir>/metrics.log
 *     report_path          path    evaluation report                                 default <output_dir>/eval_report.csv
 *     learning_rate        real    Adam step size                                    1e-4
 *     beta1, beta2         real    Adam decay rates                                  0.5, 0.999
 *     batch_size           int                                                       8
 *     patch_size           int     square crop edge, multiple of 4                   256
 *     max_steps            int     absolute step count to train to                   100000
 *     checkpoint_interval  int     steps between checkpoints                         1000
 *     seed                 int                                                       0
 *     w1, w2, w3, w4       real    loss weights                                      1, 0.001, 0.1, 1
 *     no_con, no_per, no_kl, cross_cycle   bool  ablation switches                   false
 *     code_sampling        sample|mean  brightness code during training              sample
 *     base_channels, res_blocks, disc_channels   int  architecture                   64, 4, 64
 *     perceptual           seeded|vgg16                                              seeded
 *     perceptual_seed      int                                                       7
 *     perceptual_weights   path    weight container for vgg16
 *     shift                int     misalignment bound (pixels)                       0
 *     noise                none|gaussian|poisson                                     none
 *     noise_level          real    sigma (8-bit units) or lambda                     0
 *     eval_guidance        paired|<image path>                                       paired
 */

#pragma once

#include "cidn/data.hpp"
#include "cidn/losses.hpp"
#include "cidn/model.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace cidn {

struct AblationFlags {
    bool no_con = false;
    bool no_per = false;
    bool no_kl = false;
    bool cross_cycle = false;
};

enum class CodeSampling {
    sample, ///< reparameterised draw per step
    mean,   ///< posterior mean; makes the objective deterministic
};

struct PerceptualConfig {
    losses::ExtractorSource source = losses::ExtractorSource::seeded_random;
    uint64_t seed = 7;
    std::filesystem::path weights;
};

struct TrainConfig {
    double learning_rate = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int64_t batch_size = 8;
    int64_t patch_size = 256;
    int64_t max_steps = 100000;
    int64_t checkpoint_interval = 1000;
    uint64_t seed = 0;
    losses::LossWeights weights;
    AblationFlags ablation;
    CodeSampling code_sampling = CodeSampling::sample;
    ArchConfig arch;
    PerceptualConfig perceptual;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    /// Loss weights with ablated terms forced to zero.
    losses::LossWeights effective_weights() const;
};

struct RunConfig {
    TrainConfig train;
    data::CorruptionRecipe recipe;
    std::filesystem::path dataset_root;
    std::filesystem::path eval_root;
    std::filesystem::path output_dir = "run";
    std::filesystem::path metrics_log;
    std::filesystem::path report_path;
    /// Empty: guide every evaluation pair with its own normal image.
    std::filesystem::path eval_guidance;
};

/// Parses configuration text. base_dir anchors relative paths.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Throws IoError if unreadable, ConfigError for bad content.
RunConfig load_run_config(const std::filesystem::path& path);

losses::FeatureExtractor make_extractor(const PerceptualConfig& config);

} // namespace cidn
