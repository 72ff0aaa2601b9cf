// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: sweep, allocate, validate and oracle verbs
// driven by a JSON scenario configuration.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogpilot::cli {

// Exit codes are a stable contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliCommand {
    std::string verb;                    // sweep | allocate | validate | oracle
    std::string config_path;
    std::string output_path = "-";       // "-" means standard output
    std::string format = "csv";          // csv | json
    std::vector<std::string> overrides;  // dotted key=value pairs
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
};

// Throws UsageError on unknown verbs/flags or missing required flags.
CliCommand parse_args(const std::vector<std::string>& argv);

int run(const CliCommand& cmd, std::ostream& out, std::ostream& err);

// Parse + run + map errors to exit codes; the binary's whole main.
int main_entry(int argc, const char* const* argv);

}  // namespace cogpilot::cli
