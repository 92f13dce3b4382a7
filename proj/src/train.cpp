/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/train.hpp"
#include "cidn/checkpoint.hpp"
#include "cidn/errors.hpp"

#include "cidn/log.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace cidn {

namespace fs = std::filesystem;

namespace {

void set_requires_grad(const NamedTensors& params, bool on) {
    for (const auto& [name, p] : params)
        p.requires_grad_(on);
}

void clear_grads(const NamedTensors& params) {
    for (const auto& [name, p] : params)
        p.mutable_grad() = torch::Tensor();
}

double checked(const torch::Tensor& value, const char* component) {
    const double v = value.item<double>();
    if (!std::isfinite(v))
        throw TrainingError(component, std::string("non-finite loss in component '") + component + "' (" +
                                           std::to_string(v) + ")");
    return v;
}

/// Discriminator scores are validated by the loss as probabilities; a NaN upstream
/// would surface there as a range error, so name it here first.
ScoreMaps checked_scores(ScoreMaps scores, const char* component) {
    for (const auto& s : scores)
        if (!torch::isfinite(s).all().item<bool>())
            throw TrainingError(component, std::string("non-finite discriminator output in component '") + component +
                                               "'");
    return scores;
}

} // namespace

ModelState init_model(const TrainConfig& config) {
    config.validate();
    return ModelState(config.arch, config.seed);
}

void adam_update(const NamedTensors& params, AdamMoments& moments, int64_t t, const TrainConfig& cfg) {
    torch::NoGradGuard no_grad;
    const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    for (const auto& [name, p] : params) {
        const auto& g = p.grad();
        if (!g.defined())
            continue;
        auto& m = moments.first[name];
        auto& v = moments.second[name];
        if (!m.defined()) {
            m = torch::zeros_like(p);
            v = torch::zeros_like(p);
        }
        m.mul_(cfg.beta1).add_(g, 1.0 - cfg.beta1);
        v.mul_(cfg.beta2).addcmul_(g, g, 1.0 - cfg.beta2);
        auto denom = (v / bias2).sqrt_().add_(cfg.adam_eps);
        p.addcdiv_(m, denom, -cfg.learning_rate / bias1);
    }
}

losses::LossReport train_step(const torch::Tensor& x, const torch::Tensor& y, ModelState& state, const TrainConfig& cfg,
                              const losses::FeatureExtractor& fx) {
    if (x.dim() != 4 || x.size(0) < 1)
        throw ShapeError("train_step needs a nonempty [N,3,P,P] batch");
    if (x.sizes() != y.sizes())
        throw ShapeError("low and normal batches differ in shape");

    const auto weights = cfg.effective_weights();
    const auto gen_params = state.generator_parameters();
    const auto disc_params = state.discriminator_parameters();
    const auto t = state.step;

    // Generator forward, shared by both updates.
    set_requires_grad(gen_params, true);
    auto cx = encode_content_batch(x, state);
    auto cy = encode_content_batch(y, state);
    auto post_x = encode_brightness_batch(x, state);
    auto post_y = encode_brightness_batch(y, state);
    torch::Tensor bx, by;
    if (cfg.code_sampling == CodeSampling::sample) {
        auto rng = Rng::derive(cfg.seed, Stream::code, static_cast<uint64_t>(t));
        bx = reparameterize(post_x, rng.normal_tensor(post_x.mu.sizes()));
        by = reparameterize(post_y, rng.normal_tensor(post_y.mu.sizes()));
    } else {
        bx = post_x.mu;
        by = post_y.mu;
    }
    auto x_rec = decode_batch(Domain::low, cx, bx, state);
    auto y_rec = decode_batch(Domain::normal, cy, by, state);
    auto x_swap = decode_batch(Domain::low, cy, bx, state);    // generated dark image
    auto y_swap = decode_batch(Domain::normal, cx, by, state); // enhanced image

    losses::LossReport report;

    // Discriminator update.
    set_requires_grad(disc_params, true);
    clear_grads(disc_params);
    {
        auto real_x = checked_scores(discriminate_batch(Domain::low, x, state), "adv_d_x");
        auto fake_x = checked_scores(discriminate_batch(Domain::low, x_swap.detach(), state), "adv_d_x");
        auto real_y = checked_scores(discriminate_batch(Domain::normal, y, state), "adv_d_y");
        auto fake_y = checked_scores(discriminate_batch(Domain::normal, y_swap.detach(), state), "adv_d_y");
        auto adv_d_x = losses::adversarial_d(real_x, fake_x);
        auto adv_d_y = losses::adversarial_d(real_y, fake_y);
        report.adv_d_x = checked(adv_d_x, "adv_d_x");
        report.adv_d_y = checked(adv_d_y, "adv_d_y");
        (adv_d_x + adv_d_y).backward();
        adam_update(disc_params, state.adam_discriminator, t + 1, cfg);
    }
    clear_grads(disc_params);

    // Generator / encoder update against the refreshed discriminators.
    set_requires_grad(disc_params, false);
    clear_grads(gen_params);
    auto rec_x = losses::reconstruction_l1(x_rec, x);
    auto rec_y = losses::reconstruction_l1(y_rec, y);
    auto con = losses::content_consistency(cx, cy);
    auto kl_x = losses::kl_gaussian(post_x.mu, post_x.logvar);
    auto kl_y = losses::kl_gaussian(post_y.mu, post_y.logvar);
    auto per_x = losses::perceptual(y_swap, x, fx);
    auto per_y = losses::perceptual(x_swap, y, fx);
    auto adv_g_x = losses::adversarial_g(checked_scores(discriminate_batch(Domain::low, x_swap, state), "adv_g_x"));
    auto adv_g_y = losses::adversarial_g(checked_scores(discriminate_batch(Domain::normal, y_swap, state), "adv_g_y"));

    report.rec_x = checked(rec_x, "rec_x");
    report.rec_y = checked(rec_y, "rec_y");
    report.con = checked(con, "con");
    report.kl_x = checked(kl_x, "kl_x");
    report.kl_y = checked(kl_y, "kl_y");
    report.per_x = checked(per_x, "per_x");
    report.per_y = checked(per_y, "per_y");
    report.adv_g_x = checked(adv_g_x, "adv_g_x");
    report.adv_g_y = checked(adv_g_y, "adv_g_y");

    auto total = rec_x + rec_y + weights.w1 * con + weights.w2 * (kl_x + kl_y) + weights.w3 * (per_x + per_y) +
                 weights.w4 * (adv_g_x + adv_g_y);

    if (cfg.ablation.cross_cycle) {
        // Re-encode the swapped images and swap back.
        auto x_cycle = decode_batch(Domain::low, encode_content_batch(y_swap, state),
                                    encode_brightness_batch(x_swap, state).mu, state);
        auto y_cycle = decode_batch(Domain::normal, encode_content_batch(x_swap, state),
                                    encode_brightness_batch(y_swap, state).mu, state);
        auto cyc_x = losses::reconstruction_l1(x_cycle, x);
        auto cyc_y = losses::reconstruction_l1(y_cycle, y);
        report.cyc_x = checked(cyc_x, "cyc_x");
        report.cyc_y = checked(cyc_y, "cyc_y");
        total = total + cyc_x + cyc_y;
    }

    report.total = losses::total_loss(report, weights);
    checked(total, "total");
    total.backward();
    adam_update(gen_params, state.adam_generator, t + 1, cfg);
    clear_grads(gen_params);
    set_requires_grad(disc_params, true);

    state.step = t + 1;
    return report;
}

losses::LossReport train_step(const std::vector<data::BatchItem>& batch, ModelState& state, const TrainConfig& config,
                              const losses::FeatureExtractor& extractor) {
    if (batch.empty())
        throw std::invalid_argument("train_step needs a nonempty batch");
    auto [low, normal] = data::stack(batch);
    return train_step(low, normal, state, config, extractor);
}

std::string metrics_header() {
    return "step,rec_x,rec_y,con,kl_x,kl_y,per_x,per_y,adv_g,adv_d,total";
}

std::string metrics_line(int64_t step, const losses::LossReport& r) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", static_cast<long long>(step),
                  r.rec_x, r.rec_y, r.con, r.kl_x, r.kl_y, r.per_x, r.per_y, r.adv_g_x + r.adv_g_y, r.adv_d_x + r.adv_d_y,
                  r.total);
    return buf;
}

fs::path checkpoint_path(const fs::path& dir, int64_t step) {
    char name[64];
    std::snprintf(name, sizeof(name), "ckpt_%08lld.cidn", static_cast<long long>(step));
    return dir / name;
}

TrainResult train(const data::PairSource& source, const TrainConfig& config, const TrainOptions& options) {
    config.validate();
    std::error_code ec;
    fs::create_directories(options.output_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + options.output_dir.string() + "': " + ec.message());

    const bool resumed = options.resume_from.has_value();
    ModelState state = resumed ? load_checkpoint(*options.resume_from) : init_model(config);
    if (resumed && !(state.arch() == config.arch))
        throw ConfigError("base_channels", "architecture differs from checkpoint '" + options.resume_from->string() + "'");
    if (resumed && state.seed() != config.seed)
        throw ConfigError("seed", "differs from checkpoint '" + options.resume_from->string() + "'");

    const auto extractor = make_extractor(config.perceptual);

    std::ofstream log;
    if (!options.metrics_log.empty()) {
        const bool fresh = !resumed || !fs::exists(options.metrics_log);
        log.open(options.metrics_log, fresh ? std::ios::trunc : std::ios::app);
        if (!log)
            throw IoError("cannot open metrics log '" + options.metrics_log.string() + "'");
        if (fresh)
            log << metrics_header() << '\n';
    }

    TrainResult result;
    auto save = [&](int64_t step) {
        result.final_checkpoint = checkpoint_path(options.output_dir, step);
        save_checkpoint(state, result.final_checkpoint);
        log::debug("checkpoint written: " + result.final_checkpoint.string());
    };
    if (!resumed)
        save(state.step);
    else
        result.final_checkpoint = *options.resume_from;

    while (state.step < config.max_steps) {
        const auto step = state.step;
        auto batch = data::sample_batch(source, config.batch_size, config.patch_size, config.seed, step);
        auto report = train_step(batch, state, config, extractor);
        result.reports.push_back(report);
        if (log)
            log << metrics_line(state.step, report) << '\n';
        if (options.on_step)
            options.on_step(state.step, report);
        log::info(metrics_line(state.step, report));
        if (state.step % config.checkpoint_interval == 0 || state.step == config.max_steps)
            save(state.step);
    }
    if (log)
        log.flush();
    return result;
}

} // namespace cidn
