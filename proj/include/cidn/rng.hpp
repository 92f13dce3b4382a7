/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <random>

namespace cidn {

/// Stream tags for Rng::derive. Values are part of the reproducibility contract.
enum class Stream : uint64_t {
    init = 1,
    batch = 2,
    misalign = 3,
    noise = 4,
    code = 5,
    extractor = 6,
    simulate = 7,
};

/// Seeded random source. derive() gives an independent stream for every
/// (seed, stream, index) coordinate, so any consumer can be replayed from its
/// coordinates alone without carrying engine state across checkpoints.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    static Rng derive(uint64_t seed, Stream stream, uint64_t index = 0, uint64_t sub = 0);

    std::mt19937_64& engine() { return engine_; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    /// Uniform integer in the closed range [lo, hi].
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return std::uniform_int_distribution<int64_t>(lo, hi)(engine_);
    }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
    int64_t poisson(double mean) {
        if (mean <= 0.0)
            return 0;
        return std::poisson_distribution<int64_t>(mean)(engine_);
    }

    /// Tensor of i.i.d. N(mean, stddev^2) draws, filled in row-major order.
    torch::Tensor normal_tensor(at::IntArrayRef shape, double mean = 0.0, double stddev = 1.0,
                                torch::ScalarType dtype = torch::kFloat32);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finaliser; used to fold coordinates into a seed.
uint64_t mix64(uint64_t x);

} // namespace cidn
