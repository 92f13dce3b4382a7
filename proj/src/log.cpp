/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

// Kept free of torch headers: libtorch ships its own fmt, which clashes with
// the one spdlog is built against.

#include "cidn/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <string_view>

namespace cidn::log {

namespace {

spdlog::logger& logger() {
    static auto instance = [] {
        auto l = spdlog::stderr_color_mt("cidn");
        l->set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
        return l;
    }();
    return *instance;
}

} // namespace

void set_level(Level level) {
    switch (level) {
    case Level::quiet: logger().set_level(spdlog::level::warn); break;
    case Level::info: logger().set_level(spdlog::level::info); break;
    case Level::debug: logger().set_level(spdlog::level::debug); break;
    }
}

void configure_from_env() {
    const char* env = std::getenv("CIDN_LOG");
    const std::string_view v = env ? env : "info";
    set_level(v == "quiet" ? Level::quiet : v == "debug" ? Level::debug : Level::info);
}

void info(const std::string& message) { logger().info(message); }
void debug(const std::string& message) { logger().debug(message); }
void warn(const std::string& message) { logger().warn(message); }

} // namespace cidn::log
