/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

/**
 * @file cli.hpp
 * @brief The `cidn` command line: train, enhance, eval, simulate, serve.
 *
 * Exit status: 0 success, 1 user error (bad flags, config, input files or
 * shapes), 2 internal error (unreadable checkpoint, training divergence,
 * anything unexpected). Diagnostics go to the error stream only.
 */

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cidn {

constexpr int kExitOk = 0;
constexpr int kExitUser = 1;
constexpr int kExitInternal = 2;

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cidn
