/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/losses.hpp"
#include "cidn/checkpoint.hpp"
#include "cidn/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace cidn::losses {

using torch::autograd::AutogradContext;
using torch::autograd::variable_list;

namespace {

void require_same_shape(const torch::Tensor& a, const torch::Tensor& b, const char* what) {
    if (a.sizes() != b.sizes())
        throw ShapeError(std::string(what) + ": shape mismatch " + c10::str(a.sizes()) + " vs " + c10::str(b.sizes()));
}

void require_open_unit(const torch::Tensor& scores, const char* what) {
    auto s = scores.detach();
    if (!((s > 0) & (s < 1)).all().item<bool>())
        throw std::domain_error(std::string(what) + ": scores must lie in the open interval (0,1)");
}

void require_three(size_t n, const char* what) {
    if (n != ArchConfig::num_scales)
        throw ShapeError(std::string(what) + ": expected " + std::to_string(ArchConfig::num_scales) +
                         " score maps, got " + std::to_string(n));
}

struct MeanAbsDiffFn : torch::autograd::Function<MeanAbsDiffFn> {
    static torch::Tensor forward(AutogradContext* ctx, const torch::Tensor& a, const torch::Tensor& b) {
        auto diff = a - b;
        ctx->saved_data["sign"] = diff.sign();
        return diff.abs().mean();
    }
    static variable_list backward(AutogradContext* ctx, variable_list grad_out) {
        auto sign = ctx->saved_data["sign"].toTensor();
        auto g = grad_out[0] * sign / static_cast<double>(sign.numel());
        return {g, -g};
    }
};

struct GaussianKlFn : torch::autograd::Function<GaussianKlFn> {
    static torch::Tensor forward(AutogradContext* ctx, const torch::Tensor& mu, const torch::Tensor& logvar) {
        const double n = mu.dim() == 2 ? static_cast<double>(mu.size(0)) : 1.0;
        ctx->save_for_backward({mu, logvar});
        ctx->saved_data["n"] = n;
        return 0.5 * (mu.square() + logvar.exp() - logvar - 1.0).sum() / n;
    }
    static variable_list backward(AutogradContext* ctx, variable_list grad_out) {
        auto saved = ctx->get_saved_variables();
        const double n = ctx->saved_data["n"].toDouble();
        auto g = grad_out[0] / n;
        return {g * saved[0], g * 0.5 * (saved[1].exp() - 1.0)};
    }
};

/// mean(-log s)
struct NegLogMeanFn : torch::autograd::Function<NegLogMeanFn> {
    static torch::Tensor forward(AutogradContext* ctx, const torch::Tensor& s) {
        ctx->save_for_backward({s});
        return -s.log().mean();
    }
    static variable_list backward(AutogradContext* ctx, variable_list grad_out) {
        auto s = ctx->get_saved_variables()[0];
        return {-grad_out[0] / (s * static_cast<double>(s.numel()))};
    }
};

/// mean(-log(1 - s))
struct NegLogComplementMeanFn : torch::autograd::Function<NegLogComplementMeanFn> {
    static torch::Tensor forward(AutogradContext* ctx, const torch::Tensor& s) {
        ctx->save_for_backward({s});
        return -torch::log1p(-s).mean();
    }
    static variable_list backward(AutogradContext* ctx, variable_list grad_out) {
        auto s = ctx->get_saved_variables()[0];
        return {grad_out[0] / ((1.0 - s) * static_cast<double>(s.numel()))};
    }
};

} // namespace

void LossWeights::validate() const {
    const std::pair<const char*, double> all[] = {{"w1", w1}, {"w2", w2}, {"w3", w3}, {"w4", w4}};
    for (const auto& [name, w] : all)
        if (!std::isfinite(w) || w < 0.0)
            throw std::invalid_argument(std::string("loss weight ") + name + " must be a nonnegative finite number");
}

double total_loss(const LossReport& c, const LossWeights& w) {
    w.validate();
    const double parts[] = {c.rec_x, c.rec_y, c.con, c.kl_x, c.kl_y, c.per_x, c.per_y, c.adv_g_x, c.adv_g_y, c.cyc_x, c.cyc_y};
    for (double v : parts)
        if (!std::isfinite(v))
            throw std::domain_error("loss component is not finite");
    return c.rec_x + c.rec_y + w.w1 * c.con + w.w2 * (c.kl_x + c.kl_y) + w.w3 * (c.per_x + c.per_y) +
           w.w4 * (c.adv_g_x + c.adv_g_y) + c.cyc_x + c.cyc_y;
}

torch::Tensor mean_abs_diff(const torch::Tensor& a, const torch::Tensor& b) {
    require_same_shape(a, b, "l1");
    if (a.numel() == 0)
        throw ShapeError("l1: empty input");
    return MeanAbsDiffFn::apply(a, b);
}

torch::Tensor content_consistency(const torch::Tensor& cx, const torch::Tensor& cy) {
    require_same_shape(cx, cy, "content_consistency");
    return mean_abs_diff(cx, cy);
}

torch::Tensor reconstruction_l1(const torch::Tensor& pred, const torch::Tensor& target) {
    require_same_shape(pred, target, "reconstruction_l1");
    return mean_abs_diff(pred, target);
}

torch::Tensor kl_gaussian(const torch::Tensor& mu, const torch::Tensor& logvar) {
    require_same_shape(mu, logvar, "kl_gaussian");
    if (!torch::isfinite(logvar.detach()).all().item<bool>())
        throw std::domain_error("kl_gaussian: logvar must be finite");
    return GaussianKlFn::apply(mu, logvar);
}

torch::Tensor adversarial_d(std::span<const torch::Tensor> real, std::span<const torch::Tensor> fake) {
    require_three(real.size(), "adversarial_d");
    require_three(fake.size(), "adversarial_d");
    torch::Tensor total;
    for (size_t k = 0; k < real.size(); ++k) {
        require_open_unit(real[k], "adversarial_d");
        require_open_unit(fake[k], "adversarial_d");
        auto term = NegLogMeanFn::apply(real[k]) + NegLogComplementMeanFn::apply(fake[k]);
        total = total.defined() ? total + term : term;
    }
    return total;
}

torch::Tensor adversarial_g(std::span<const torch::Tensor> fake) {
    require_three(fake.size(), "adversarial_g");
    torch::Tensor total;
    for (const auto& f : fake) {
        require_open_unit(f, "adversarial_g");
        auto term = NegLogMeanFn::apply(f);
        total = total.defined() ? total + term : term;
    }
    return total;
}

// -- FeatureExtractor ---------------------------------------------------------------

FeatureExtractor FeatureExtractor::seeded(uint64_t seed) {
    struct Spec {
        int64_t in, out;
        bool pool, tap;
    };
    const Spec specs[] = {{3, 16, false, false}, {16, 16, false, true}, {16, 32, true, true}, {32, 64, true, true}};
    FeatureExtractor fx;
    fx.source_ = ExtractorSource::seeded_random;
    uint64_t index = 0;
    for (const auto& s : specs) {
        auto rng = Rng::derive(seed, Stream::extractor, index++);
        const double he_std = std::sqrt(2.0 / static_cast<double>(s.in * 9));
        Layer layer;
        layer.weight = rng.normal_tensor({s.out, s.in, 3, 3}, 0.0, he_std);
        layer.bias = torch::zeros({s.out});
        layer.pool_before = s.pool;
        layer.tap_after = s.tap;
        fx.layers_.push_back(std::move(layer));
    }
    return fx;
}

FeatureExtractor FeatureExtractor::vgg16(const std::filesystem::path& weights) {
    auto container = read_container(weights);
    struct Spec {
        const char* name;
        int64_t in, out;
        bool pool, tap;
    };
    const Spec specs[] = {
        {"conv1_1", 3, 64, false, false},    {"conv1_2", 64, 64, false, true},
        {"conv2_1", 64, 128, true, false},   {"conv2_2", 128, 128, false, true},
        {"conv3_1", 128, 256, true, false},  {"conv3_2", 256, 256, false, false},
        {"conv3_3", 256, 256, false, true},
    };
    FeatureExtractor fx;
    fx.source_ = ExtractorSource::external_pretrained;
    fx.imagenet_normalize_ = true;
    for (const auto& s : specs) {
        const auto* w = container.array(std::string(s.name) + ".weight");
        const auto* b = container.array(std::string(s.name) + ".bias");
        if (!w || !b)
            throw CheckpointError(weights.string() + ": missing VGG-16 layer " + s.name);
        if (w->sizes() != torch::IntArrayRef{s.out, s.in, 3, 3} || b->sizes() != torch::IntArrayRef{s.out})
            throw CheckpointError(weights.string() + ": VGG-16 layer " + s.name + " has unexpected shape");
        fx.layers_.push_back({w->clone(), b->clone(), s.pool, s.tap});
    }
    return fx;
}

std::vector<torch::Tensor> FeatureExtractor::features(const torch::Tensor& images) const {
    auto h = images;
    if (imagenet_normalize_) {
        auto opts = torch::TensorOptions().dtype(images.scalar_type());
        auto mean = torch::tensor({0.485, 0.456, 0.406}, opts).view({1, 3, 1, 1});
        auto std = torch::tensor({0.229, 0.224, 0.225}, opts).view({1, 3, 1, 1});
        h = (h - mean) / std;
    }
    std::vector<torch::Tensor> taps;
    for (const auto& layer : layers_) {
        if (layer.pool_before)
            h = torch::max_pool2d(h, 2);
        h = torch::relu(torch::conv2d(h, layer.weight, layer.bias, 1, 1));
        if (layer.tap_after)
            taps.push_back(h);
    }
    return taps;
}

FeatureExtractor FeatureExtractor::to(torch::ScalarType dtype) const {
    FeatureExtractor out = *this;
    for (auto& layer : out.layers_) {
        layer.weight = layer.weight.to(dtype);
        layer.bias = layer.bias.to(dtype);
    }
    return out;
}

size_t FeatureExtractor::num_taps() const {
    size_t n = 0;
    for (const auto& layer : layers_)
        n += layer.tap_after ? 1 : 0;
    return n;
}

torch::Tensor perceptual(const torch::Tensor& a, const torch::Tensor& b, const FeatureExtractor& fx) {
    require_same_shape(a, b, "perceptual");
    auto fa = fx.features(a);
    auto fb = fx.features(b);
    torch::Tensor total;
    for (size_t n = 0; n < fa.size(); ++n) {
        auto term = mean_abs_diff(fa[n], fb[n]);
        total = total.defined() ? total + term : term;
    }
    return total;
}

double content_consistency(const ContentFeature& cx, const ContentFeature& cy) {
    torch::NoGradGuard no_grad;
    return content_consistency(cx.map, cy.map).item<double>();
}

double reconstruction_l1(const Image& pred, const Image& target) {
    torch::NoGradGuard no_grad;
    return reconstruction_l1(pred.tensor().to(torch::kFloat64), target.tensor().to(torch::kFloat64)).item<double>();
}

double kl_gaussian(const BrightnessPosterior& posterior) {
    torch::NoGradGuard no_grad;
    return kl_gaussian(posterior.mu.to(torch::kFloat64), posterior.logvar.to(torch::kFloat64)).item<double>();
}

double perceptual(const Image& a, const Image& b, const FeatureExtractor& fx) {
    torch::NoGradGuard no_grad;
    return perceptual(a.batched(), b.batched(), fx).item<double>();
}

} // namespace cidn::losses
