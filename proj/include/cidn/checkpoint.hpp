/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file checkpoint.hpp
 * @brief Versioned binary container for model state and feature weights.
 *
 * Layout (all integers little-endian):
 *
 *     offset  size  field
 *     0       4     magic "CIDN"
 *     4       4     u32 format version (currently 1)
 *     8       4     u32 metadata entry count M
 *                   M x { u16 key length, key bytes (UTF-8), i64 value }
 *             4     u32 array count A
 *                   A x { u16 name length, name bytes, u8 dtype (1 = float32),
 *                         u8 rank R, R x i64 extent, row-major element data }
 *             8     u64 FNV-1a 64 hash of every preceding byte
 *
 * Model checkpoints carry metadata "kind" = 1, "arch.base_channels",
 * "arch.res_blocks", "arch.disc_channels", "arch.brightness_dim" (8),
 * "arch.stride" (4), "arch.num_scales" (3), "step" and "seed" (u64 stored as
 * its i64 bit pattern). Arrays are the network parameters by name followed by
 * Adam moments "adam.g.m/<name>", "adam.g.v/<name>", "adam.d.m/<name>",
 * "adam.d.v/<name>". Feature-extractor weight files use "kind" = 2.
 */

#pragma once

#include "cidn/model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cidn {

inline constexpr uint32_t kContainerVersion = 1;
inline constexpr int64_t kKindModel = 1;
inline constexpr int64_t kKindFeatureWeights = 2;

struct Container {
    std::vector<std::pair<std::string, int64_t>> metadata;
    NamedTensors arrays;

    /// Throws CheckpointError when the key is absent.
    int64_t meta(const std::string& key) const;
    const torch::Tensor* array(const std::string& name) const;
};

std::string serialize(const Container& container);
/// Throws CheckpointError naming the defect (magic, version, truncation, checksum).
Container deserialize(std::string_view bytes);

void write_container(const Container& container, const std::filesystem::path& path);
Container read_container(const std::filesystem::path& path);

std::string checkpoint_bytes(const ModelState& state);
ModelState state_from_bytes(std::string_view bytes);

/// Writes atomically (temporary file + rename).
void save_checkpoint(const ModelState& state, const std::filesystem::path& path);
ModelState load_checkpoint(const std::filesystem::path& path);

/// Short identifier "<file stem>@<step>:<hash prefix>" for service responses.
std::string checkpoint_id(const std::filesystem::path& path, std::string_view bytes);

} // namespace cidn
