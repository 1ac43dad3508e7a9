// SPDX-License-Identifier: Apache-2.0
#include "mimo_ae/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>

#include "mimo_ae/autoencoder.hpp"
#include "mimo_ae/detectors.hpp"
#include "mimo_ae/fronthaul.hpp"
#include "mimo_ae/signal_model.hpp"

namespace mimo_ae {
namespace {

std::string fmt(const char* f, double v) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

SelftestResult check_gradient(std::uint64_t seed) {
  Rng rng(substream_seed(seed, 0, StreamTag::kTest, 1));
  AutoencoderConfig cfg;
  cfg.input_dim = 8;
  cfg.n_div = 2;
  RMatrix X(8, 6);
  for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.uniform(-1.0, 1.0);
  AutoencoderModel m = initial_model(X, cfg, rng);
  const RVector theta = pack_parameters(m);
  const RVector g = pack_gradient(gradient(m, X, cfg));
  RVector fd(theta.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    RVector t = theta;
    t(i) += h;
    unpack_parameters(t, m);
    const double up = loss(m, X, cfg);
    t(i) -= 2 * h;
    unpack_parameters(t, m);
    const double dn = loss(m, X, cfg);
    fd(i) = (up - dn) / (2 * h);
  }
  const double rel = (g - fd).norm() / std::max(fd.norm(), 1e-300);
  return {"autoencoder gradient vs central differences", rel < 1e-5,
          fmt("relative error %.3e", rel)};
}

SelftestResult check_gs(std::uint64_t seed) {
  Rng rng(substream_seed(seed, 0, StreamTag::kTest, 2));
  const CMatrix H = generate_channel(64, 8, rng);
  CMatrix Y(64, 4);
  for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = rng.complex_normal(1.0);
  const CMatrix zf = zf_exact(H, Y).s_hat;
  const CMatrix gs = gs_detect(H, Y, 200).s_hat;
  const double rel = (gs - zf).norm() / zf.norm();
  return {"Gauss-Seidel (200 sweeps) vs exact zero forcing", rel < 1e-8,
          fmt("relative error %.3e", rel)};
}

SelftestResult check_admm(std::uint64_t seed) {
  Rng rng(substream_seed(seed, 0, StreamTag::kTest, 3));
  const CMatrix H = generate_channel(64, 8, rng);
  CMatrix Y(64, 4);
  for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = rng.complex_normal(1.0);
  const CMatrix a =
      admm_gs_detect(partition_clusters(H, Y, 1, 0.0, 5, 1)).s_hat;
  const CMatrix g = gs_detect(H, Y, 5).s_hat;
  const double diff = (a - g).cwiseAbs().maxCoeff();
  return {"ADMM with one cluster and rho=0 equals Gauss-Seidel", diff < 1e-12,
          fmt("max abs difference %.3e", diff)};
}

SelftestResult check_wire(std::uint64_t seed) {
  Rng rng(substream_seed(seed, 0, StreamTag::kTest, 4));
  WireFrame f;
  f.kind = FrameKind::kLatentGrid;
  f.block_id = 0x0123456789abcdefULL;
  f.rows = 16;
  f.cols = 84;
  f.M = 64;
  f.n_div = 8;
  for (std::uint32_t i = 0; i < f.rows * f.cols; ++i)
    f.payload.push_back(static_cast<float>(rng.uniform()));
  auto bytes = serialize(f);
  const bool same = deserialize(bytes) == f;
  bytes[kHeaderBytes + 5] ^= 0x01;
  bool crc_caught = false;
  try {
    deserialize(bytes);
  } catch (const MalformedFrame& e) {
    crc_caught = e.reason() == MalformedFrame::Reason::kBadCrc;
  }
  return {"frame round trip and CRC check", same && crc_caught,
          std::string(same ? "round trip exact" : "round trip differs") +
              (crc_caught ? ", corruption detected" : ", corruption missed")};
}

SelftestResult check_ledger() {
  const BandwidthLedger l = paper_sample_count(512, 12, 7, 8);
  const bool ok = l.latent_samples == 10752 && l.overhead_samples == 1536 &&
                  l.effective_factor() == 7.0;
  return {"closed-form bandwidth ledger (512, 12, 7, 8)", ok,
          fmt("effective factor %.6g", l.effective_factor())};
}

}  // namespace

std::vector<SelftestResult> run_selftest(std::uint64_t seed) {
  std::vector<SelftestResult> out;
  const std::function<SelftestResult()> checks[] = {
      [&] { return check_gradient(seed); }, [&] { return check_gs(seed); },
      [&] { return check_admm(seed); },     [&] { return check_wire(seed); },
      [] { return check_ledger(); },
  };
  for (const auto& c : checks) {
    try {
      out.push_back(c());
    } catch (const std::exception& e) {
      out.push_back({"(check threw)", false, e.what()});
    }
  }
  return out;
}

}  // namespace mimo_ae
