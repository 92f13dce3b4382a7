/* SPDX-FileCopyrightText: 2026 CIDN Authors
 * SPDX-License-Identifier: Apache-2.0 */

#include "cidn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return cidn::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
