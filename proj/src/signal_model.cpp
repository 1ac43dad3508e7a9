// SPDX-License-Identifier: Apache-2.0
#include "mimo_ae/signal_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mimo_ae {
namespace {

std::vector<Complex> square_qam(int side) {
  // Levels -(side-1), ..., -1, 1, ..., side-1; average power 2(side^2-1)/3.
  const double norm = std::sqrt(2.0 * (side * side - 1) / 3.0);
  std::vector<Complex> pts;
  pts.reserve(static_cast<std::size_t>(side * side));
  for (int i = 0; i < side; ++i) {
    for (int q = 0; q < side; ++q) {
      pts.emplace_back((2 * i - side + 1) / norm, (2 * q - side + 1) / norm);
    }
  }
  return pts;
}

}  // namespace

std::string_view to_string(Constellation c) {
  switch (c) {
    case Constellation::kQpsk:
      return "qpsk";
    case Constellation::kQam16:
      return "qam16";
    case Constellation::kQam64:
      return "qam64";
  }
  return "unknown";
}

Constellation parse_constellation(std::string_view name) {
  if (name == "qpsk" || name == "QPSK") return Constellation::kQpsk;
  if (name == "qam16" || name == "QAM16" || name == "16qam")
    return Constellation::kQam16;
  if (name == "qam64" || name == "QAM64" || name == "64qam")
    return Constellation::kQam64;
  throw ConfigError("unknown constellation '" + std::string(name) + "'");
}

const std::vector<Complex>& constellation_points(Constellation c) {
  static const std::vector<Complex> qpsk = square_qam(2);
  static const std::vector<Complex> qam16 = square_qam(4);
  static const std::vector<Complex> qam64 = square_qam(8);
  switch (c) {
    case Constellation::kQpsk:
      return qpsk;
    case Constellation::kQam16:
      return qam16;
    case Constellation::kQam64:
      return qam64;
  }
  return qam16;
}

std::vector<std::string> SystemConfig::violations() const {
  std::vector<std::string> out;
  if (K < 1) out.push_back("K must be >= 1 (got " + std::to_string(K) + ")");
  if (M <= K)
    out.push_back("M must exceed K (got M=" + std::to_string(M) +
                  ", K=" + std::to_string(K) + ")");
  if (n_cbw < 1) out.push_back("n_cbw must be >= 1");
  if (n_sc < 1) out.push_back("n_sc must be >= 1");
  if (n_cbw >= 1 && n_sc >= 1 && n_sc % n_cbw != 0)
    out.push_back("n_cbw (" + std::to_string(n_cbw) + ") must divide n_sc (" +
                  std::to_string(n_sc) + ")");
  if (n_slot < 2) out.push_back("n_slot must be >= 2");
  return out;
}

void SystemConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid system config:";
  for (const auto& m : v) os << "\n  - " << m;
  throw ConfigError(os.str());
}

double snr_to_noise_var(double snr_db, int K) {
  return static_cast<double>(K) * std::pow(10.0, -snr_db / 10.0);
}

CMatrix generate_channel(int M, int K, Rng& rng) {
  CMatrix h(M, K);
  // Column-major fill order is part of the determinism contract.
  for (int k = 0; k < K; ++k)
    for (int m = 0; m < M; ++m) h(m, k) = rng.complex_normal(1.0);
  return h;
}

SymbolGrid draw_symbols(int K, int n_re, Constellation c, Rng& rng) {
  require_dims(K >= 1 && n_re >= 1, "draw_symbols: K and n_re must be >= 1");
  const auto& pts = constellation_points(c);
  SymbolGrid g;
  g.constellation = c;
  g.entries.resize(K, n_re);
  for (int j = 0; j < n_re; ++j)
    for (int k = 0; k < K; ++k) g.entries(k, j) = pts[rng.index(pts.size())];
  return g;
}

CoherenceBlock assemble_block(std::uint64_t block_id, CMatrix channel,
                              SymbolGrid tx, const CMatrix& unit_noise,
                              double noise_var) {
  require_dims(channel.cols() == tx.entries.rows(),
               "assemble_block: channel columns must equal user count");
  require_dims(unit_noise.rows() == channel.rows() &&
                   unit_noise.cols() == tx.entries.cols(),
               "assemble_block: noise grid shape mismatch");
  CoherenceBlock b;
  b.block_id = block_id;
  b.rx.noise_var = noise_var;
  b.rx.entries = channel * tx.entries;
  if (noise_var > 0.0) b.rx.entries += std::sqrt(noise_var) * unit_noise;
  b.channel = std::move(channel);
  b.tx = std::move(tx);
  return b;
}

namespace {

CMatrix unit_noise_for(const SystemConfig& cfg, std::uint64_t block_id) {
  Rng rng(substream_seed(cfg.master_seed, block_id, StreamTag::kNoise));
  CMatrix n(cfg.M, cfg.n_re());
  for (int j = 0; j < n.cols(); ++j)
    for (int m = 0; m < n.rows(); ++m) n(m, j) = rng.complex_normal(1.0);
  return n;
}

}  // namespace

CoherenceBlock build_coherence_block(const SystemConfig& cfg, double snr_db,
                                     std::uint64_t block_id) {
  Rng ch_rng(substream_seed(cfg.master_seed, block_id, StreamTag::kChannel));
  Rng sym_rng(substream_seed(cfg.master_seed, block_id, StreamTag::kSymbols));
  CMatrix h = generate_channel(cfg.M, cfg.K, ch_rng);
  SymbolGrid tx = draw_symbols(cfg.K, cfg.n_re(), cfg.constellation, sym_rng);
  return assemble_block(block_id, std::move(h), std::move(tx),
                        unit_noise_for(cfg, block_id),
                        snr_to_noise_var(snr_db, cfg.K));
}

ReceivedGrid rescale_noise(const SystemConfig& cfg, const CoherenceBlock& block,
                           double snr_db) {
  ReceivedGrid rx;
  rx.noise_var = snr_to_noise_var(snr_db, cfg.K);
  rx.entries = block.channel * block.tx.entries;
  if (rx.noise_var > 0.0)
    rx.entries += std::sqrt(rx.noise_var) * unit_noise_for(cfg, block.block_id);
  return rx;
}

CMatrix training_columns(const CoherenceBlock& block, int n_cbw) {
  require_dims(n_cbw >= 1 && n_cbw <= block.rx.entries.cols(),
               "training_columns: n_cbw out of range");
  return block.rx.entries.leftCols(n_cbw);
}

RVector complex_to_real_stack(const CVector& v) {
  const Eigen::Index m = v.size();
  RVector r(2 * m);
  r.head(m) = v.real();
  r.tail(m) = v.imag();
  return r;
}

CVector real_stack_to_complex(const RVector& r) {
  require_dims(r.size() % 2 == 0,
               "real_stack_to_complex: stack length must be even");
  const Eigen::Index m = r.size() / 2;
  CVector v(m);
  for (Eigen::Index i = 0; i < m; ++i) v(i) = Complex(r(i), r(m + i));
  return v;
}

RMatrix stack_columns(const CMatrix& c) {
  const Eigen::Index m = c.rows();
  RMatrix r(2 * m, c.cols());
  r.topRows(m) = c.real();
  r.bottomRows(m) = c.imag();
  return r;
}

CMatrix unstack_columns(const RMatrix& r) {
  require_dims(r.rows() % 2 == 0,
               "unstack_columns: stacked row count must be even");
  const Eigen::Index m = r.rows() / 2;
  CMatrix c(m, r.cols());
  c.real() = r.topRows(m);
  c.imag() = r.bottomRows(m);
  return c;
}

}  // namespace mimo_ae
