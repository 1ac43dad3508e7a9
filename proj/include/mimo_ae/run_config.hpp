// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: sectioned INI file plus command-line overrides, turned
// into a SweepConfig. See docs/config.md for the keys.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mimo_ae/evaluation.hpp"

namespace mimo_ae {

struct RunConfig {
  SystemConfig system;
  std::vector<ScenarioKind> scenarios = {ScenarioKind::kFullBw,
                                         ScenarioKind::kAe,
                                         ScenarioKind::kArrayReduced,
                                         ScenarioKind::kAdmm};
  std::vector<int> ndiv = {2, 4, 8};
  std::vector<double> snr_db = {-10, -5, 0, 5, 10, 15, 20};
  int blocks = 50;
  int iterations = 5;
  int threads = 0;
  int admm_clusters = 4;
  AdmmSettings admm;
  AeSettings ae = desk_ae_settings();

  static AeSettings desk_ae_settings();

  /// Desk scale with M=512, K=40. Keeps the other fields.
  void apply_paper_scale();

  SweepConfig to_sweep() const;

  std::vector<std::string> violations() const;
  void validate() const;
};

/// Reads the INI file over `base`. Unknown sections or keys and malformed
/// values are collected and thrown together as one ConfigError.
RunConfig load_run_config(std::istream& is, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path,
                          RunConfig base = {});

/// Comma-separated lists; throw ConfigError on a bad token.
std::vector<double> parse_double_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);
std::vector<ScenarioKind> parse_scenario_list(const std::string& text);

}  // namespace mimo_ae
