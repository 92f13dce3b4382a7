/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/config.hpp"
#include "cidn/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cidn {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double to_real(const std::string& key, const std::string& v) {
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(key, "expected a real number, got '" + v + "'");
    return out;
}

int64_t to_int(const std::string& key, const std::string& v) {
    int64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes")
        return true;
    if (v == "false" || v == "0" || v == "no")
        return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate", "must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0))
        throw ConfigError("beta1", "must lie in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("beta2", "must lie in [0,1)");
    if (batch_size < 1)
        throw ConfigError("batch_size", "must be >= 1");
    if (patch_size < ArchConfig::min_size || patch_size % ArchConfig::stride != 0)
        throw ConfigError("patch_size", "must be a multiple of 4 and >= 64");
    if (max_steps < 0)
        throw ConfigError("max_steps", "must be >= 0");
    if (checkpoint_interval < 1)
        throw ConfigError("checkpoint_interval", "must be >= 1");
    const std::pair<const char*, double> ws[] = {{"w1", weights.w1}, {"w2", weights.w2}, {"w3", weights.w3}, {"w4", weights.w4}};
    for (const auto& [name, w] : ws)
        if (!(w >= 0.0) || !std::isfinite(w))
            throw ConfigError(name, "loss weights must be nonnegative");
    if (arch.base_channels < 1)
        throw ConfigError("base_channels", "must be >= 1");
    if (arch.res_blocks < 0)
        throw ConfigError("res_blocks", "must be >= 0");
    if (arch.disc_channels < 1)
        throw ConfigError("disc_channels", "must be >= 1");
    if (perceptual.source == losses::ExtractorSource::external_pretrained && perceptual.weights.empty())
        throw ConfigError("perceptual_weights", "required when perceptual = vgg16");
}

losses::LossWeights TrainConfig::effective_weights() const {
    auto w = weights;
    if (ablation.no_con)
        w.w1 = 0.0;
    if (ablation.no_kl)
        w.w2 = 0.0;
    if (ablation.no_per)
        w.w3 = 0.0;
    return w;
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
    RunConfig rc;
    auto path_of = [&](const std::string& v) {
        fs::path p(v);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };

    auto& t = rc.train;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"dataset_root", [&](auto&, auto& v) { rc.dataset_root = path_of(v); }},
        {"eval_root", [&](auto&, auto& v) { rc.eval_root = path_of(v); }},
        {"output_dir", [&](auto&, auto& v) { rc.output_dir = path_of(v); }},
        {"metrics_log", [&](auto&, auto& v) { rc.metrics_log = path_of(v); }},
        {"report_path", [&](auto&, auto& v) { rc.report_path = path_of(v); }},
        {"learning_rate", [&](auto& k, auto& v) { t.learning_rate = to_real(k, v); }},
        {"beta1", [&](auto& k, auto& v) { t.beta1 = to_real(k, v); }},
        {"beta2", [&](auto& k, auto& v) { t.beta2 = to_real(k, v); }},
        {"batch_size", [&](auto& k, auto& v) { t.batch_size = to_int(k, v); }},
        {"patch_size", [&](auto& k, auto& v) { t.patch_size = to_int(k, v); }},
        {"max_steps", [&](auto& k, auto& v) { t.max_steps = to_int(k, v); }},
        {"checkpoint_interval", [&](auto& k, auto& v) { t.checkpoint_interval = to_int(k, v); }},
        {"seed", [&](auto& k, auto& v) { t.seed = static_cast<uint64_t>(to_int(k, v)); }},
        {"w1", [&](auto& k, auto& v) { t.weights.w1 = to_real(k, v); }},
        {"w2", [&](auto& k, auto& v) { t.weights.w2 = to_real(k, v); }},
        {"w3", [&](auto& k, auto& v) { t.weights.w3 = to_real(k, v); }},
        {"w4", [&](auto& k, auto& v) { t.weights.w4 = to_real(k, v); }},
        {"no_con", [&](auto& k, auto& v) { t.ablation.no_con = to_bool(k, v); }},
        {"no_per", [&](auto& k, auto& v) { t.ablation.no_per = to_bool(k, v); }},
        {"no_kl", [&](auto& k, auto& v) { t.ablation.no_kl = to_bool(k, v); }},
        {"cross_cycle", [&](auto& k, auto& v) { t.ablation.cross_cycle = to_bool(k, v); }},
        {"code_sampling",
         [&](auto& k, auto& v) {
             if (v == "sample")
                 t.code_sampling = CodeSampling::sample;
             else if (v == "mean")
                 t.code_sampling = CodeSampling::mean;
             else
                 throw ConfigError(k, "expected sample or mean, got '" + v + "'");
         }},
        {"base_channels", [&](auto& k, auto& v) { t.arch.base_channels = to_int(k, v); }},
        {"res_blocks", [&](auto& k, auto& v) { t.arch.res_blocks = to_int(k, v); }},
        {"disc_channels", [&](auto& k, auto& v) { t.arch.disc_channels = to_int(k, v); }},
        {"perceptual",
         [&](auto& k, auto& v) {
             if (v == "seeded")
                 t.perceptual.source = losses::ExtractorSource::seeded_random;
             else if (v == "vgg16")
                 t.perceptual.source = losses::ExtractorSource::external_pretrained;
             else
                 throw ConfigError(k, "expected seeded or vgg16, got '" + v + "'");
         }},
        {"perceptual_seed", [&](auto& k, auto& v) { t.perceptual.seed = static_cast<uint64_t>(to_int(k, v)); }},
        {"perceptual_weights", [&](auto&, auto& v) { t.perceptual.weights = path_of(v); }},
        {"shift", [&](auto& k, auto& v) { rc.recipe.max_shift = to_int(k, v); }},
        {"noise",
         [&](auto& k, auto& v) {
             if (v == "none")
                 rc.recipe.noise = data::NoiseKind::none;
             else if (v == "gaussian")
                 rc.recipe.noise = data::NoiseKind::gaussian;
             else if (v == "poisson")
                 rc.recipe.noise = data::NoiseKind::poisson;
             else
                 throw ConfigError(k, "expected none, gaussian or poisson, got '" + v + "'");
         }},
        {"noise_level", [&](auto& k, auto& v) { rc.recipe.level = to_real(k, v); }},
        {"eval_guidance",
         [&](auto&, auto& v) { rc.eval_guidance = v == "paired" ? fs::path{} : path_of(v); }},
    };

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        auto stripped = trim(line);
        if (stripped.empty())
            continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(stripped, "line " + std::to_string(line_no) + " is not of the form key = value");
        auto key = trim(std::string_view(stripped).substr(0, eq));
        auto value = trim(std::string_view(stripped).substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(key, "unknown key");
        if (value.empty())
            throw ConfigError(key, "missing value");
        it->second(key, value);
    }

    try {
        rc.recipe.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(rc.recipe.noise == data::NoiseKind::none ? "shift" : "noise_level", e.what());
    }
    t.validate();
    if (rc.eval_root.empty())
        rc.eval_root = rc.dataset_root;
    if (rc.metrics_log.empty())
        rc.metrics_log = rc.output_dir / "metrics.log";
    if (rc.report_path.empty())
        rc.report_path = rc.output_dir / "eval_report.csv";
    return rc;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str(), path.parent_path());
}

losses::FeatureExtractor make_extractor(const PerceptualConfig& config) {
    if (config.source == losses::ExtractorSource::external_pretrained)
        return losses::FeatureExtractor::vgg16(config.weights);
    return losses::FeatureExtractor::seeded(config.seed);
}

} // namespace cidn
