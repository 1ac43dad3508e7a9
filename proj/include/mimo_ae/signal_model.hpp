// SPDX-License-Identifier: Apache-2.0
//
// Uplink OFDM coherence-block generation: block-fading Rayleigh channels,
// unit-power constellations, AWGN, and the complex <-> real stacking used at
// the autoencoder boundary.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mimo_ae/rng.hpp"
#include "mimo_ae/types.hpp"

namespace mimo_ae {

enum class Constellation { kQpsk, kQam16, kQam64 };

std::string_view to_string(Constellation c);
Constellation parse_constellation(std::string_view name);

/// Unit-average-power constellation points, in a fixed order.
const std::vector<Complex>& constellation_points(Constellation c);

struct SystemConfig {
  int M = 64;
  int K = 8;
  int n_sc = 1200;
  int n_cbw = 12;
  int n_slot = 7;
  Constellation constellation = Constellation::kQam16;
  std::uint64_t master_seed = 1;

  /// Resource elements per coherence block (n_cbw * n_slot).
  int n_re() const { return n_cbw * n_slot; }

  /// Every violated invariant, one message each; empty when valid.
  std::vector<std::string> violations() const;
  /// Throws ConfigError listing all violations.
  void validate() const;
};

struct SymbolGrid {
  CMatrix entries;  // K x n_re
  Constellation constellation = Constellation::kQam16;
};

struct ReceivedGrid {
  CMatrix entries;  // M x n_re
  double noise_var = 0.0;
};

/// One channel-constant tile: n_cbw subcarriers x n_slot OFDM symbols.
/// Column j holds subcarrier (j % n_cbw) of OFDM symbol (j / n_cbw), so the
/// first n_cbw columns are the training block.
struct CoherenceBlock {
  std::uint64_t block_id = 0;
  CMatrix channel;  // M x K, shared by all resource elements
  SymbolGrid tx;
  ReceivedGrid rx;
};

/// Per-antenna receive SNR convention with unit-variance channel taps and unit
/// per-user power: noise variance = K / 10^(snr_db / 10). +inf dB gives 0.
double snr_to_noise_var(double snr_db, int K);

CMatrix generate_channel(int M, int K, Rng& rng);
SymbolGrid draw_symbols(int K, int n_re, Constellation c, Rng& rng);

/// Builds block `block_id` from the config's master seed. Channel, symbols
/// and a unit-variance noise draw come from independent substreams keyed on
/// (master_seed, block_id), so every SNR sees the same realization scaled.
CoherenceBlock build_coherence_block(const SystemConfig& cfg, double snr_db,
                                     std::uint64_t block_id);

/// Same block with the noise re-scaled to another SNR (fixed-SNR training).
ReceivedGrid rescale_noise(const SystemConfig& cfg, const CoherenceBlock& block,
                           double snr_db);

/// rx = channel * tx + sqrt(noise_var) * unit_noise, columnwise.
CoherenceBlock assemble_block(std::uint64_t block_id, CMatrix channel,
                              SymbolGrid tx, const CMatrix& unit_noise,
                              double noise_var);

/// First n_cbw received columns (the training block).
CMatrix training_columns(const CoherenceBlock& block, int n_cbw);

/// [Re(v_1..v_M); Im(v_1..v_M)].
RVector complex_to_real_stack(const CVector& v);
CVector real_stack_to_complex(const RVector& r);

/// Column-wise stacking of a complex M x N matrix into a real 2M x N one.
RMatrix stack_columns(const CMatrix& c);
CMatrix unstack_columns(const RMatrix& r);

}  // namespace mimo_ae
