/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/model.hpp"
#include "cidn/errors.hpp"

#include <string>

namespace cidn {

namespace F = torch::nn::functional;

namespace {

constexpr double kLeakySlope = 0.2;
constexpr double kInitStd = 0.02;
constexpr double kNormEps = 1e-5;

torch::Tensor lrelu(const torch::Tensor& x) {
    return torch::leaky_relu(x, kLeakySlope);
}

std::string dims_str(int64_t h, int64_t w) {
    return std::to_string(h) + "x" + std::to_string(w);
}

void check_content_input(int64_t h, int64_t w) {
    if (h % ArchConfig::stride != 0 || w % ArchConfig::stride != 0)
        throw ShapeError("image dimensions " + dims_str(h, w) + " must be divisible by " +
                         std::to_string(ArchConfig::stride));
    if (h < ArchConfig::min_guidance_size || w < ArchConfig::min_guidance_size)
        throw ShapeError("image dimensions " + dims_str(h, w) + " below minimum edge " +
                         std::to_string(ArchConfig::min_guidance_size));
}

void check_images(const torch::Tensor& images) {
    if (images.dim() != 4 || images.size(1) != 3)
        throw ShapeError("expected [N,3,H,W] images, got " + std::string(c10::str(images.sizes())));
}

} // namespace

void ArchConfig::validate() const {
    if (base_channels < 1)
        throw std::invalid_argument("base_channels must be >= 1");
    if (res_blocks < 0)
        throw std::invalid_argument("res_blocks must be >= 0");
    if (disc_channels < 1)
        throw std::invalid_argument("disc_channels must be >= 1");
}

namespace nn {

PaddedConvImpl::PaddedConvImpl(int64_t in, int64_t out, int64_t kernel, int64_t stride,
                               std::shared_ptr<Padding> padding)
    : stride_(stride), pad_(kernel / 2), padding_(std::move(padding)) {
    weight = register_parameter("weight", torch::zeros({out, in, kernel, kernel}));
    bias = register_parameter("bias", torch::zeros({out}));
}

torch::Tensor PaddedConvImpl::forward(const torch::Tensor& x) const {
    torch::Tensor padded = x;
    if (pad_ > 0) {
        F::PadFuncOptions opts({pad_, pad_, pad_, pad_});
        if (*padding_ == Padding::cyclic)
            opts.mode(torch::kCircular);
        else
            opts.mode(torch::kReflect);
        padded = F::pad(x, opts);
    }
    return torch::conv2d(padded, weight, bias, stride_);
}

torch::Tensor instance_norm(const torch::Tensor& x, Padding padding) {
    if (padding == Padding::reflect)
        return torch::instance_norm(x, {}, {}, {}, {}, true, 0.0, kNormEps, false);

    const auto n = static_cast<double>(x.size(2) * x.size(3));
    auto sorted = std::get<0>(x.flatten(2).sort(-1));
    auto mean = sorted.sum(-1, true) / n;
    auto centered = std::get<0>((sorted - mean).square().sort(-1));
    auto var = centered.sum(-1, true) / n;
    auto shape = std::vector<int64_t>{x.size(0), x.size(1), 1, 1};
    return (x - mean.view(shape)) / (var.view(shape) + kNormEps).sqrt();
}

ResidualBlockImpl::ResidualBlockImpl(int64_t channels, std::shared_ptr<Padding> padding)
    : padding_(padding) {
    conv1_ = register_module("conv1", PaddedConv(channels, channels, 3, 1, padding));
    conv2_ = register_module("conv2", PaddedConv(channels, channels, 3, 1, padding));
}

torch::Tensor ResidualBlockImpl::forward(const torch::Tensor& x) const {
    auto r = lrelu(instance_norm(conv1_->forward(x), *padding_));
    r = instance_norm(conv2_->forward(r), *padding_);
    return x + r;
}

ContentEncoderImpl::ContentEncoderImpl(const ArchConfig& arch, std::shared_ptr<Padding> padding)
    : padding_(padding) {
    const auto b = arch.base_channels;
    conv_in_ = register_module("conv_in", PaddedConv(3, b, 7, 1, padding));
    down1_ = register_module("down1", PaddedConv(b, 2 * b, 3, 2, padding));
    down2_ = register_module("down2", PaddedConv(2 * b, 4 * b, 3, 2, padding));
    for (int64_t i = 0; i < arch.res_blocks; ++i)
        blocks_.push_back(register_module("res" + std::to_string(i), ResidualBlock(4 * b, padding)));
}

torch::Tensor ContentEncoderImpl::forward(const torch::Tensor& x) const {
    auto h = lrelu(instance_norm(conv_in_->forward(x), *padding_));
    h = lrelu(instance_norm(down1_->forward(h), *padding_));
    h = lrelu(instance_norm(down2_->forward(h), *padding_));
    for (const auto& block : blocks_)
        h = block->forward(h);
    return h;
}

BrightnessEncoderImpl::BrightnessEncoderImpl(const ArchConfig& arch, std::shared_ptr<Padding> padding) {
    const auto b = arch.base_channels;
    const std::array<int64_t, 5> widths{3, b, 2 * b, 4 * b, 4 * b};
    for (size_t i = 0; i + 1 < widths.size(); ++i)
        convs_.push_back(register_module("conv" + std::to_string(i),
                                         PaddedConv(widths[i], widths[i + 1], 3, 2, padding)));
    mu_weight = register_parameter("mu_weight", torch::zeros({ArchConfig::brightness_dim, 4 * b}));
    mu_bias = register_parameter("mu_bias", torch::zeros({ArchConfig::brightness_dim}));
    logvar_weight = register_parameter("logvar_weight", torch::zeros({ArchConfig::brightness_dim, 4 * b}));
    logvar_bias = register_parameter("logvar_bias", torch::zeros({ArchConfig::brightness_dim}));
}

std::pair<torch::Tensor, torch::Tensor> BrightnessEncoderImpl::forward(const torch::Tensor& x) const {
    auto h = x;
    for (const auto& conv : convs_)
        h = lrelu(conv->forward(h));
    auto pooled = h.mean({2, 3});
    return {torch::linear(pooled, mu_weight, mu_bias), torch::linear(pooled, logvar_weight, logvar_bias)};
}

DecoderImpl::DecoderImpl(const ArchConfig& arch, std::shared_ptr<Padding> padding) {
    const auto b = arch.base_channels;
    const auto cc = arch.content_channels();
    const auto nb = ArchConfig::brightness_dim;
    conv_in_ = register_module("conv_in", PaddedConv(cc + nb, cc, 3, 1, padding));
    for (int64_t i = 0; i < arch.res_blocks; ++i) {
        Block blk;
        blk.conv1 = register_module("res" + std::to_string(i) + "_conv1", PaddedConv(cc + nb, cc, 3, 1, padding));
        blk.conv2 = register_module("res" + std::to_string(i) + "_conv2", PaddedConv(cc, cc, 3, 1, padding));
        blocks_.push_back(blk);
    }
    up1_ = register_module("up1", PaddedConv(4 * b, 2 * b, 3, 1, padding));
    up2_ = register_module("up2", PaddedConv(2 * b, b, 3, 1, padding));
    conv_out_ = register_module("conv_out", PaddedConv(b, 3, 7, 1, padding));
}

torch::Tensor DecoderImpl::forward(const torch::Tensor& content, const torch::Tensor& code) const {
    const auto n = content.size(0);
    auto inject = [&](const torch::Tensor& h) {
        auto map = code.view({n, ArchConfig::brightness_dim, 1, 1}).expand({n, ArchConfig::brightness_dim, h.size(2), h.size(3)});
        return torch::cat({h, map}, 1);
    };
    auto upsample = [](const torch::Tensor& h) {
        return torch::upsample_nearest2d(h, std::vector<int64_t>{h.size(2) * 2, h.size(3) * 2});
    };

    auto h = lrelu(conv_in_->forward(inject(content)));
    for (const auto& blk : blocks_) {
        auto r = lrelu(blk.conv1->forward(inject(h)));
        h = h + blk.conv2->forward(r);
    }
    h = lrelu(up1_->forward(upsample(h)));
    h = lrelu(up2_->forward(upsample(h)));
    return torch::sigmoid(conv_out_->forward(h));
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(int64_t channels) {
    const std::array<int64_t, 5> widths{3, channels, 2 * channels, 4 * channels, 1};
    for (size_t i = 0; i + 1 < widths.size(); ++i) {
        const int64_t k = i + 2 < widths.size() ? 4 : 3;
        auto w = register_parameter("conv" + std::to_string(i) + "_weight", torch::zeros({widths[i + 1], widths[i], k, k}));
        auto b = register_parameter("conv" + std::to_string(i) + "_bias", torch::zeros({widths[i + 1]}));
        layers_.emplace_back(w, b);
    }
}

torch::Tensor PatchDiscriminatorImpl::forward(const torch::Tensor& x) const {
    auto h = x;
    for (size_t i = 0; i < layers_.size(); ++i) {
        const bool last = i + 1 == layers_.size();
        h = torch::conv2d(h, layers_[i].first, layers_[i].second, last ? 1 : 2, 1);
        if (!last)
            h = lrelu(h);
    }
    return h;
}

MultiScaleDiscriminatorImpl::MultiScaleDiscriminatorImpl(int64_t channels) {
    for (size_t k = 0; k < scales_.size(); ++k)
        scales_[k] = register_module("scale" + std::to_string(k), PatchDiscriminator(channels));
}

ScoreMaps MultiScaleDiscriminatorImpl::forward(const torch::Tensor& x) const {
    ScoreMaps maps;
    auto cur = x;
    for (size_t k = 0; k < scales_.size(); ++k) {
        if (k > 0)
            cur = torch::avg_pool2d(cur, 2);
        maps[k] = torch::sigmoid(scales_[k]->forward(cur)).clamp(kScoreEps, 1.0 - kScoreEps);
    }
    return maps;
}

} // namespace nn

// -- ModelState --------------------------------------------------------------------

namespace {

NamedTensors prefixed(const torch::nn::Module& module, const std::string& prefix) {
    NamedTensors out;
    for (const auto& item : module.named_parameters(true))
        out.emplace_back(prefix + item.key(), item.value());
    return out;
}

void append(NamedTensors& dst, NamedTensors src) {
    for (auto& p : src)
        dst.push_back(std::move(p));
}

} // namespace

ModelState::ModelState(const ArchConfig& arch, uint64_t seed)
    : arch_(arch), seed_(seed), padding_(std::make_shared<Padding>(Padding::reflect)) {
    arch_.validate();
    ec_ = nn::ContentEncoder(arch_, padding_);
    eb_ = nn::BrightnessEncoder(arch_, padding_);
    gx_ = nn::Decoder(arch_, padding_);
    gy_ = nn::Decoder(arch_, padding_);
    dx_ = nn::MultiScaleDiscriminator(arch_.disc_channels);
    dy_ = nn::MultiScaleDiscriminator(arch_.disc_channels);

    torch::NoGradGuard no_grad;
    uint64_t index = 0;
    for (auto& [name, param] : all_parameters()) {
        const bool is_bias = name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0;
        if (is_bias) {
            param.zero_();
        } else {
            auto rng = Rng::derive(seed_, Stream::init, index);
            param.copy_(rng.normal_tensor(param.sizes(), 0.0, kInitStd));
        }
        ++index;
    }
}

NamedTensors ModelState::generator_parameters() const {
    NamedTensors out;
    append(out, prefixed(*ec_, "ec."));
    append(out, prefixed(*eb_, "eb."));
    append(out, prefixed(*gx_, "gx."));
    append(out, prefixed(*gy_, "gy."));
    return out;
}

NamedTensors ModelState::discriminator_parameters() const {
    NamedTensors out;
    append(out, prefixed(*dx_, "dx."));
    append(out, prefixed(*dy_, "dy."));
    return out;
}

NamedTensors ModelState::all_parameters() const {
    auto out = generator_parameters();
    append(out, discriminator_parameters());
    return out;
}

ModelState ModelState::clone() const {
    ModelState copy(arch_, seed_);
    torch::NoGradGuard no_grad;
    auto dst = copy.all_parameters();
    auto src = all_parameters();
    for (size_t i = 0; i < src.size(); ++i)
        dst[i].second.copy_(src[i].second);
    copy.step = step;
    auto clone_moments = [](const AdamMoments& m) {
        AdamMoments out;
        for (const auto& [k, v] : m.first)
            out.first.emplace(k, v.clone());
        for (const auto& [k, v] : m.second)
            out.second.emplace(k, v.clone());
        return out;
    };
    copy.adam_generator = clone_moments(adam_generator);
    copy.adam_discriminator = clone_moments(adam_discriminator);
    copy.set_padding(padding());
    return copy;
}

bool ModelState::identical(const ModelState& other) const {
    if (!(arch_ == other.arch_) || seed_ != other.seed_ || step != other.step)
        return false;
    auto a = all_parameters();
    auto b = other.all_parameters();
    if (a.size() != b.size())
        return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].first != b[i].first || !torch::equal(a[i].second, b[i].second))
            return false;
    auto same = [](const std::map<std::string, torch::Tensor>& x, const std::map<std::string, torch::Tensor>& y) {
        if (x.size() != y.size())
            return false;
        for (const auto& [k, v] : x) {
            auto it = y.find(k);
            if (it == y.end() || !torch::equal(v, it->second))
                return false;
        }
        return true;
    };
    return same(adam_generator.first, other.adam_generator.first) &&
           same(adam_generator.second, other.adam_generator.second) &&
           same(adam_discriminator.first, other.adam_discriminator.first) &&
           same(adam_discriminator.second, other.adam_discriminator.second);
}

// -- Batched paths -------------------------------------------------------------------

torch::Tensor encode_content_batch(const torch::Tensor& images, const ModelState& state) {
    check_images(images);
    check_content_input(images.size(2), images.size(3));
    return state.content_encoder()->forward(images);
}

BrightnessPosterior encode_brightness_batch(const torch::Tensor& images, const ModelState& state) {
    check_images(images);
    if (images.size(2) < ArchConfig::min_guidance_size || images.size(3) < ArchConfig::min_guidance_size)
        throw ShapeError("brightness input " + dims_str(images.size(2), images.size(3)) + " below minimum edge " +
                         std::to_string(ArchConfig::min_guidance_size));
    auto [mu, logvar] = state.brightness_encoder()->forward(images);
    return {mu, logvar};
}

torch::Tensor reparameterize(const BrightnessPosterior& posterior, const torch::Tensor& eps) {
    return posterior.mu + torch::exp(0.5 * posterior.logvar) * eps;
}

torch::Tensor decode_batch(Domain domain, const torch::Tensor& content, const torch::Tensor& code,
                           const ModelState& state) {
    const auto cc = state.arch().content_channels();
    if (content.dim() != 4 || content.size(1) != cc)
        throw ShapeError("content feature must be [N," + std::to_string(cc) + ",h,w], got " +
                         std::string(c10::str(content.sizes())));
    if (code.dim() != 2 || code.size(1) != ArchConfig::brightness_dim || code.size(0) != content.size(0))
        throw ShapeError("brightness code must be [N,8] matching the content batch, got " +
                         std::string(c10::str(code.sizes())));
    return state.decoder(domain)->forward(content, code);
}

ScoreMaps discriminate_batch(Domain domain, const torch::Tensor& images, const ModelState& state) {
    check_images(images);
    if (images.size(2) < ArchConfig::min_size || images.size(3) < ArchConfig::min_size)
        throw ShapeError("discriminator input " + dims_str(images.size(2), images.size(3)) +
                         " too small for the 1/4 scale; minimum edge is " + std::to_string(ArchConfig::min_size));
    return state.discriminator(domain)->forward(images);
}

// -- Single-image operations ---------------------------------------------------------

ContentFeature encode_content(const Image& image, const ModelState& state) {
    torch::NoGradGuard no_grad;
    return {encode_content_batch(image.batched(), state)};
}

BrightnessPosterior encode_brightness(const Image& image, const ModelState& state) {
    torch::NoGradGuard no_grad;
    return encode_brightness_batch(image.batched(), state);
}

BrightnessCode sample_brightness(const BrightnessPosterior& posterior, SampleMode mode, Rng& rng) {
    if (mode == SampleMode::infer)
        return {posterior.mu.clone()};
    auto eps = rng.normal_tensor(posterior.mu.sizes(), 0.0, 1.0, posterior.mu.scalar_type());
    return {reparameterize(posterior, eps)};
}

Image decode(Domain domain, const ContentFeature& content, const BrightnessCode& code, const ModelState& state) {
    torch::NoGradGuard no_grad;
    return Image(decode_batch(domain, content.map, code.code, state));
}

EnhanceTrace enhance_traced(const Image& low, const Image& guidance, const ModelState& state) {
    torch::NoGradGuard no_grad;
    EnhanceTrace trace;
    trace.content = encode_content(low, state);
    trace.guidance_posterior = encode_brightness(guidance, state);
    trace.code = {trace.guidance_posterior.mu};
    trace.output = decode(Domain::normal, trace.content, trace.code, state);
    return trace;
}

Image enhance(const Image& low, const Image& guidance, const ModelState& state) {
    return enhance_traced(low, guidance, state).output;
}

Image darken(const Image& normal, const Image& low_reference, const ModelState& state) {
    torch::NoGradGuard no_grad;
    auto content = encode_content(normal, state);
    auto posterior = encode_brightness(low_reference, state);
    return decode(Domain::low, content, {posterior.mu}, state);
}

ScoreMaps discriminate(Domain domain, const Image& image, const ModelState& state) {
    torch::NoGradGuard no_grad;
    return discriminate_batch(domain, image.batched(), state);
}

} // namespace cidn
