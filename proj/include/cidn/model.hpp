/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file model.hpp
 * @brief Cross-image disentanglement network: encoders, decoders, discriminators.
 *
 * A shared content encoder maps an image to a spatial feature map at 1/4
 * resolution; a shared brightness encoder maps it to an 8-dim Gaussian
 * posterior. Two decoders (low-light and normal-light) rebuild an image from
 * a content map plus a brightness code, and each domain has a three-scale
 * patch discriminator. Enhancement decodes the content of a low-light image
 * with the posterior mean of a guidance image under the normal-light decoder.
 *
 * Tensors are NCHW float32. Forward operations are pure given their inputs
 * and a read-only ModelState, so they may run concurrently.
 */

#pragma once

#include "cidn/image.hpp"
#include "cidn/rng.hpp"

#include <torch/torch.h>

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cidn {

enum class Padding : uint8_t {
    reflect = 0,
    /// Wrap-around padding; test mode that makes shift-equivariance exact.
    cyclic = 1,
};

enum class Domain { low, normal };

enum class SampleMode { train, infer };

struct ArchConfig {
    int64_t base_channels = 64;
    int64_t res_blocks = 4;
    int64_t disc_channels = 64;

    static constexpr int64_t stride = 4;
    static constexpr int64_t brightness_dim = 8;
    static constexpr int64_t num_scales = 3;
    /// Smallest edge the three-scale discriminator pyramid accepts.
    static constexpr int64_t min_size = 64;
    /// Smallest edge a guidance image may have (four stride-2 convolutions).
    static constexpr int64_t min_guidance_size = 16;

    int64_t content_channels() const { return 4 * base_channels; }
    void validate() const;

    bool operator==(const ArchConfig&) const = default;
};

/// [N, Cc, H/4, W/4] structure features.
struct ContentFeature {
    torch::Tensor map;
};

/// [N, 8] mean and log-variance of the brightness code.
struct BrightnessPosterior {
    torch::Tensor mu;
    torch::Tensor logvar;
};

/// [N, 8] realised brightness code.
struct BrightnessCode {
    torch::Tensor code;
};

/// One score map per discriminator scale: full, 1/2 and 1/4 resolution.
using ScoreMaps = std::array<torch::Tensor, ArchConfig::num_scales>;

/// Scores are clamped to [kScoreEps, 1 - kScoreEps] so that log-losses stay finite.
inline constexpr double kScoreEps = 1e-6;

namespace nn {

/// Convolution with explicit reflect or cyclic padding; weight [out,in,k,k], bias [out].
class PaddedConvImpl : public torch::nn::Module {
public:
    PaddedConvImpl(int64_t in, int64_t out, int64_t kernel, int64_t stride, std::shared_ptr<Padding> padding);
    torch::Tensor forward(const torch::Tensor& x) const;

    torch::Tensor weight;
    torch::Tensor bias;

private:
    int64_t stride_;
    int64_t pad_;
    std::shared_ptr<Padding> padding_;
};
TORCH_MODULE(PaddedConv);

/// Instance normalisation without affine terms. Under cyclic padding the
/// statistics are accumulated over sorted values, which makes them invariant
/// to any spatial permutation bit for bit.
torch::Tensor instance_norm(const torch::Tensor& x, Padding padding);

class ResidualBlockImpl : public torch::nn::Module {
public:
    ResidualBlockImpl(int64_t channels, std::shared_ptr<Padding> padding);
    torch::Tensor forward(const torch::Tensor& x) const;

private:
    PaddedConv conv1_{nullptr};
    PaddedConv conv2_{nullptr};
    std::shared_ptr<Padding> padding_;
};
TORCH_MODULE(ResidualBlock);

/// conv7 s1 (b) -> conv3 s2 (2b) -> conv3 s2 (4b) -> residual blocks; IN + leaky ReLU.
class ContentEncoderImpl : public torch::nn::Module {
public:
    ContentEncoderImpl(const ArchConfig& arch, std::shared_ptr<Padding> padding);
    torch::Tensor forward(const torch::Tensor& x) const;

private:
    PaddedConv conv_in_{nullptr};
    PaddedConv down1_{nullptr};
    PaddedConv down2_{nullptr};
    std::vector<ResidualBlock> blocks_;
    std::shared_ptr<Padding> padding_;
};
TORCH_MODULE(ContentEncoder);

/// Four stride-2 convolutions, global average pooling, linear mu/logvar heads.
class BrightnessEncoderImpl : public torch::nn::Module {
public:
    BrightnessEncoderImpl(const ArchConfig& arch, std::shared_ptr<Padding> padding);
    std::pair<torch::Tensor, torch::Tensor> forward(const torch::Tensor& x) const;

    torch::Tensor mu_weight, mu_bias, logvar_weight, logvar_bias;

private:
    std::vector<PaddedConv> convs_;
};
TORCH_MODULE(BrightnessEncoder);

/// Mirror of the content encoder. The brightness code is broadcast and
/// concatenated to the features at the decoder input and inside every
/// residual block; no normalisation follows an injection point so the code
/// can move global intensity.
class DecoderImpl : public torch::nn::Module {
public:
    DecoderImpl(const ArchConfig& arch, std::shared_ptr<Padding> padding);
    torch::Tensor forward(const torch::Tensor& content, const torch::Tensor& code) const;

private:
    struct Block {
        PaddedConv conv1{nullptr};
        PaddedConv conv2{nullptr};
    };
    PaddedConv conv_in_{nullptr};
    std::vector<Block> blocks_;
    PaddedConv up1_{nullptr};
    PaddedConv up2_{nullptr};
    PaddedConv conv_out_{nullptr};
};
TORCH_MODULE(Decoder);

/// conv4 s2 x3 + conv3 s1 patch discriminator with leaky ReLU, zero padding. Returns logits.
class PatchDiscriminatorImpl : public torch::nn::Module {
public:
    explicit PatchDiscriminatorImpl(int64_t channels);
    torch::Tensor forward(const torch::Tensor& x) const;

private:
    std::vector<std::pair<torch::Tensor, torch::Tensor>> layers_;
};
TORCH_MODULE(PatchDiscriminator);

class MultiScaleDiscriminatorImpl : public torch::nn::Module {
public:
    explicit MultiScaleDiscriminatorImpl(int64_t channels);
    /// Scores in [kScoreEps, 1 - kScoreEps]; scale k sees the input average-pooled k times by 2.
    ScoreMaps forward(const torch::Tensor& x) const;

private:
    std::array<PatchDiscriminator, ArchConfig::num_scales> scales_{nullptr, nullptr, nullptr};
};
TORCH_MODULE(MultiScaleDiscriminator);

} // namespace nn

using NamedTensors = std::vector<std::pair<std::string, torch::Tensor>>;

/// First and second Adam moments keyed by parameter name.
struct AdamMoments {
    std::map<std::string, torch::Tensor> first;
    std::map<std::string, torch::Tensor> second;
};

/**
 * All learnable parameters plus optimizer state, step counter and seed.
 *
 * Parameter names are prefixed by sub-network: "ec." content encoder,
 * "eb." brightness encoder, "gx."/"gy." low/normal decoders and
 * "dx."/"dy." low/normal discriminator sets.
 */
class ModelState {
public:
    /// Allocates every network and draws weights N(0, 0.02), biases 0, from seed.
    ModelState(const ArchConfig& arch, uint64_t seed);

    ModelState(const ModelState&) = delete;
    ModelState& operator=(const ModelState&) = delete;
    ModelState(ModelState&&) = default;
    ModelState& operator=(ModelState&&) = default;

    const ArchConfig& arch() const { return arch_; }
    uint64_t seed() const { return seed_; }

    int64_t step = 0;
    AdamMoments adam_generator;
    AdamMoments adam_discriminator;

    Padding padding() const { return *padding_; }
    void set_padding(Padding p) const { *padding_ = p; }

    const nn::ContentEncoder& content_encoder() const { return ec_; }
    const nn::BrightnessEncoder& brightness_encoder() const { return eb_; }
    const nn::Decoder& decoder(Domain d) const { return d == Domain::low ? gx_ : gy_; }
    const nn::MultiScaleDiscriminator& discriminator(Domain d) const { return d == Domain::low ? dx_ : dy_; }

    /// Encoders and decoders, in registration order.
    NamedTensors generator_parameters() const;
    /// Both discriminator sets, in registration order.
    NamedTensors discriminator_parameters() const;
    NamedTensors all_parameters() const;

    /// Deep copy (independent parameter storage).
    ModelState clone() const;

    /// Bitwise equality of arch, step, seed, parameters and moments.
    bool identical(const ModelState& other) const;

private:
    ArchConfig arch_;
    uint64_t seed_;
    std::shared_ptr<Padding> padding_;
    nn::ContentEncoder ec_{nullptr};
    nn::BrightnessEncoder eb_{nullptr};
    nn::Decoder gx_{nullptr};
    nn::Decoder gy_{nullptr};
    nn::MultiScaleDiscriminator dx_{nullptr};
    nn::MultiScaleDiscriminator dy_{nullptr};
};

// -- Single-image operations --------------------------------------------------

/// Requires H and W divisible by 4. Output [1, Cc, H/4, W/4].
ContentFeature encode_content(const Image& image, const ModelState& state);

/// Any image with both edges >= 16. Output mu/logvar of shape [1, 8].
BrightnessPosterior encode_brightness(const Image& image, const ModelState& state);

/// infer: the posterior mean. train: mu + exp(logvar / 2) * eps, eps ~ N(0, I) from rng.
BrightnessCode sample_brightness(const BrightnessPosterior& posterior, SampleMode mode, Rng& rng);

Image decode(Domain domain, const ContentFeature& content, const BrightnessCode& code, const ModelState& state);

/// Normal-light decoder applied to the low image's content and the guidance's mean code.
Image enhance(const Image& low, const Image& guidance, const ModelState& state);

/// Low-light decoder applied to the normal image's content and the reference's mean code.
Image darken(const Image& normal, const Image& low_reference, const ModelState& state);

ScoreMaps discriminate(Domain domain, const Image& image, const ModelState& state);

/// Intermediate values of enhance(), for instrumentation.
struct EnhanceTrace {
    ContentFeature content;
    BrightnessPosterior guidance_posterior;
    BrightnessCode code;
    Image output;
};
EnhanceTrace enhance_traced(const Image& low, const Image& guidance, const ModelState& state);

// -- Batched tensor paths used by training --------------------------------------

torch::Tensor encode_content_batch(const torch::Tensor& images, const ModelState& state);
BrightnessPosterior encode_brightness_batch(const torch::Tensor& images, const ModelState& state);
/// Reparameterised sample with externally supplied standard-normal noise.
torch::Tensor reparameterize(const BrightnessPosterior& posterior, const torch::Tensor& eps);
torch::Tensor decode_batch(Domain domain, const torch::Tensor& content, const torch::Tensor& code, const ModelState& state);
ScoreMaps discriminate_batch(Domain domain, const torch::Tensor& images, const ModelState& state);

} // namespace cidn
