/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file log.hpp
 * @brief Thin logging facade; messages go to stderr.
 *
 * Verbosity comes from CIDN_LOG (quiet | info | debug, default info).
 */

#pragma once

#include <string>

namespace cidn::log {

enum class Level { quiet, info, debug };

/// Reads CIDN_LOG; unknown values fall back to info.
void configure_from_env();
void set_level(Level level);

void info(const std::string& message);
void debug(const std::string& message);
void warn(const std::string& message);

} // namespace cidn::log
