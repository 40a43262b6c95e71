/**
 * @file cli.hpp
 * @brief Command-line front end: solve | sweep | verify | limits | fit | tensions.
 *
 * Exit codes: 0 success, 1 validation error, 2 numerical failure.
 * Flags override a `--config` file of `key = value` lines, whose keys are the
 * long flag names; the config overrides built-in defaults.
 */
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace madelung::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 1;
inline constexpr int exit_numerical = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace madelung::cli
