#pragma once

#include <string>
#include <vector>

namespace atomkit {

struct SelftestResult {
  std::string name;
  int checks = 0;
  int failures = 0;
  std::string note;
};

/// Property self-test battery behind the CLI `selftest` subcommand.
/// `filter` keeps only suites whose name contains the substring.
std::vector<SelftestResult> run_selftest(const std::string& filter = "",
                                         uint64_t seed = 0);

}  // namespace atomkit
