/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#pragma once

#include <stdexcept>
#include <string>

namespace cidn {

/// Tensor or image dimensions violate an operation's shape contract.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Bytes that should hold an image could not be decoded.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A dataset directory is inconsistent (e.g. a low-light file with no normal-light counterpart).
class DatasetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Filesystem failure, always carrying the offending path in the message.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Checkpoint container is unreadable, truncated, or of an unknown version.
class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value. key() names the offending entry.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& what)
        : std::invalid_argument("config key '" + key + "': " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// A training step produced a non-finite loss. component() names the term.
class TrainingError : public std::runtime_error {
public:
    TrainingError(std::string component, const std::string& what)
        : std::runtime_error(what), component_(std::move(component)) {}

    const std::string& component() const noexcept { return component_; }

private:
    std::string component_;
};

} // namespace cidn
