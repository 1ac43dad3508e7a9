// SPDX-License-Identifier: Apache-2.0
//
// Linear uplink detectors over the Gram system A s = H^H y: matched filter,
// MRC, exact zero forcing (test oracle), Gauss-Seidel, and consensus ADMM with
// Gauss-Seidel inner solves over row-partitioned antenna clusters.
#pragma once

#include <string>
#include <vector>

#include "mimo_ae/types.hpp"

namespace mimo_ae {

enum class DetectorKind { kMrc, kZf, kGaussSeidel, kAdmmGs };

std::string to_string(DetectorKind k);

struct DetectionResult {
  CMatrix s_hat;  // K x n_re
  DetectorKind method = DetectorKind::kZf;
  int iterations = 0;
};

/// H^H Y.
CMatrix matched_filter(const CMatrix& H, const CMatrix& Y);

/// H^H H, symmetrized as (A + A^H) / 2.
CMatrix gram(const CMatrix& H);

/// diag(A)^-1 H^H Y.
DetectionResult mrc_detect(const CMatrix& H, const CMatrix& Y);

/// Direct solve of (A + loading I) s = H^H y via LDL^T. Throws
/// SingularityError when A is singular to working precision.
DetectionResult zf_exact(const CMatrix& H, const CMatrix& Y,
                         double loading = 0.0);

/// Gauss-Seidel sweeps on A s = y_mf with s0 = D^-1 y_mf. Each column is
/// solved independently.
DetectionResult gs_detect(const CMatrix& H, const CMatrix& Y, int iterations,
                          double loading = 0.0);

/// Gauss-Seidel on an explicit Gram system; exposed for the ADMM inner solve
/// and for tests. `s` is the warm start and is updated in place.
void gauss_seidel_sweeps(const CMatrix& A, const CMatrix& rhs, int sweeps,
                         CMatrix& s);

/// Spectral radius of the Gauss-Seidel iteration matrix -(D+L)^-1 U.
double gs_spectral_radius(const CMatrix& A);

struct ClusterPartition {
  int clusters = 1;
  std::vector<CMatrix> channels;   // (M/c) x K each
  std::vector<CMatrix> received;   // (M/c) x n_re each
  double rho = 1.0;
  int t_outer = 5;
  int t_inner = 1;
};

/// Contiguous equal row blocks. Throws ConfigError when c does not divide M.
ClusterPartition partition_clusters(const CMatrix& H, const CMatrix& Y, int c,
                                    double rho = 1.0, int t_outer = 5,
                                    int t_inner = 1);

/// Consensus residual max_c ||s_c - z||_F after each outer iteration.
struct AdmmTrace {
  std::vector<double> consensus_residual;
};

/// Consensus ADMM on min_s sum_c 1/2 ||y_c - H_c s||^2. Each cluster runs
/// t_inner warm-started GS sweeps on (A_c + rho I) s_c = y_mf,c + rho (z - u_c),
/// then z = mean_c(s_c + u_c) and u_c += s_c - z. Throws ConvergenceError if
/// the consensus residual grows past 10x its first value.
DetectionResult admm_gs_detect(const ClusterPartition& p,
                               AdmmTrace* trace = nullptr);

/// 100 * sqrt(sum |s_hat - s|^2 / sum |s|^2).
double evm_percent(const CMatrix& s_hat, const CMatrix& s);

/// Error and reference power, for pooling EVM over many blocks.
struct EvmAccumulator {
  double error_power = 0.0;
  double reference_power = 0.0;

  void add(const CMatrix& s_hat, const CMatrix& s);
  EvmAccumulator& operator+=(const EvmAccumulator& o) {
    error_power += o.error_power;
    reference_power += o.reference_power;
    return *this;
  }
  double percent() const;
};

}  // namespace mimo_ae
