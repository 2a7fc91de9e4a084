#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pce {

struct SuiteResult {
  std::string name;
  std::string module;
  bool passed = true;
  double max_error = 0.0;  // largest observed error, in the suite's own measure
  double tolerance = 0.0;
  std::string detail;
};

struct SelftestReport {
  std::vector<SuiteResult> suites;
  bool passed() const;
  std::string to_json() const;
};

/// Runs every invariant suite. Failures are reported, never thrown.
SelftestReport run_selftest(std::uint64_t seed = 0x5eed2020ULL);

}  // namespace pce
