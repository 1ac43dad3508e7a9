// SPDX-License-Identifier: Apache-2.0
//
// Fast invariant checks run by `mimo_ae selftest`.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mimo_ae {

struct SelftestResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<SelftestResult> run_selftest(std::uint64_t seed = 1);

}  // namespace mimo_ae
