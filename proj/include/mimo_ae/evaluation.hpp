// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo EVM-vs-SNR sweeps over paired coherence blocks. `sweep` runs
// (snr, block) work items on OpenMP threads; `sweep_serial` is the plain-loop
// reference the parallel path must match byte for byte.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mimo_ae/autoencoder.hpp"
#include "mimo_ae/detectors.hpp"
#include "mimo_ae/fronthaul.hpp"
#include "mimo_ae/signal_model.hpp"

namespace mimo_ae {

enum class ScenarioKind { kFullBw, kAe, kArrayReduced, kAdmm };

std::string_view to_string(ScenarioKind k);
ScenarioKind parse_scenario_kind(std::string_view tag);

struct Scenario {
  ScenarioKind kind = ScenarioKind::kFullBw;
  int n_div = 1;     // kAe, kArrayReduced
  int clusters = 1;  // kAdmm
  int iterations = 5;

  static Scenario full_bw(int iterations = 5);
  static Scenario ae(int n_div, int iterations = 5);
  static Scenario array_reduced(int n_div, int iterations = 5);
  static Scenario admm(int clusters, int iterations = 5);

  /// Value of the CSV n_div column: the reduction factor for kAe and
  /// kArrayReduced, the cluster count for kAdmm, 1 for kFullBw.
  int division() const;
  std::string label() const;  // e.g. "ae/8"
};

enum class TrainingSnr { kOperating, kFixed };

struct AeSettings {
  AutoencoderConfig hyper;  // input_dim and n_div are filled per scenario
  TrainingSnr training_snr = TrainingSnr::kOperating;
  double fixed_training_snr_db = 10.0;
  int rotations = 4;  // phase rotations of the training columns
  WirePrecision precision = WirePrecision::kFloat32;
};

struct AdmmSettings {
  double rho = 1.0;
  int t_inner = 1;
};

struct SweepConfig {
  SystemConfig system;
  std::vector<Scenario> scenarios;
  std::vector<double> snr_db;
  int n_blocks = 50;
  AeSettings ae;
  AdmmSettings admm;
  int threads = 0;  // 0: MIMO_AE_THREADS or the OpenMP default

  std::vector<std::string> violations() const;
  void validate() const;
};

/// Detection outcome of one block under one scenario.
struct BlockOutcome {
  EvmAccumulator evm;
  double recon_mse = 0.0;  // mean |y_rec - y|^2 per complex entry (AE only)
  BandwidthLedger ledger;  // actual-mode transfer counts (AE only)
};

/// `training_rx`, when given, replaces the block's own received grid as the
/// source of the training columns (fixed-SNR training).
BlockOutcome run_block(const CoherenceBlock& block, const Scenario& sc,
                       const SweepConfig& cfg,
                       const ReceivedGrid* training_rx = nullptr);

struct SweepRecord {
  std::string scenario;  // ScenarioKind tag
  int n_div = 1;
  double snr_db = 0.0;
  double evm_percent = 0.0;
  int n_blocks = 0;
  std::uint64_t seed = 0;
  double recon_mse = 0.0;
  double paper_factor = 0.0;
  std::uint64_t actual_overhead = 0;
};

std::vector<SweepRecord> sweep(const SweepConfig& cfg);
std::vector<SweepRecord> sweep_serial(const SweepConfig& cfg);

/// Threads a sweep will use for this config.
int resolve_threads(const SweepConfig& cfg);

inline constexpr const char* kCsvHeader =
    "scenario,n_div,snr_db,evm_percent,n_blocks,seed,recon_mse,paper_factor,"
    "actual_overhead";

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_csv(const std::vector<SweepRecord>& records, std::ostream& os);
/// Throws std::invalid_argument for an empty record list and
/// std::runtime_error naming the path on I/O failure.
void emit_csv(const std::vector<SweepRecord>& records,
              const std::filesystem::path& path);
/// Throws CsvError naming the offending line or missing column.
std::vector<SweepRecord> parse_csv(std::istream& is);
std::vector<SweepRecord> read_csv(const std::filesystem::path& path);

/// One row per SNR, one column per scenario series.
void emit_plot_csv(const std::vector<SweepRecord>& records,
                   const std::filesystem::path& path);

struct RemarkCheck {
  std::string name;
  std::string statement;
  bool evaluated = false;
  bool pass = false;
  double margin = 0.0;  // worst-case slack; negative means violated
  int points = 0;
  std::string detail;
};

/// Remarks on the EVM curves: (i) autoencoder n_div=8 within 10% of full
/// bandwidth at SNR <= 0 dB; (ii) autoencoder n_div=8 below array reduction
/// by 4 at SNR >= 0 dB; (iii) autoencoder n_div=8 within 3 EVM points of
/// 4-cluster ADMM everywhere.
std::vector<RemarkCheck> evaluate_remarks(
    const std::vector<SweepRecord>& records);

/// Commonly quoted effective reduction factor for M=512, n_cbw=12,
/// n_slot=7, n_div=8. The closed form evaluates to 7.0 for the same tuple;
/// reports print both.
inline constexpr double kQuotedEffectiveFactor = 7.466;

std::string emit_report(const std::vector<SweepRecord>& records);

}  // namespace mimo_ae
