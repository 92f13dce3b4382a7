/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/rng.hpp"

namespace cidn {

uint64_t mix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

Rng Rng::derive(uint64_t seed, Stream stream, uint64_t index, uint64_t sub) {
    uint64_t h = mix64(seed);
    h = mix64(h ^ static_cast<uint64_t>(stream));
    h = mix64(h ^ index);
    h = mix64(h ^ sub);
    return Rng(h);
}

torch::Tensor Rng::normal_tensor(at::IntArrayRef shape, double mean, double stddev, torch::ScalarType dtype) {
    auto out = torch::empty(shape, torch::kFloat64);
    auto* p = out.data_ptr<double>();
    std::normal_distribution<double> dist(mean, stddev);
    for (int64_t i = 0, n = out.numel(); i < n; ++i)
        p[i] = dist(engine_);
    return out.to(dtype);
}

} // namespace cidn
