// SPDX-License-Identifier: Apache-2.0

#include "cogpilot/cli.hpp"

int main(int argc, char** argv) { return cogpilot::cli::main_entry(argc, argv); }
