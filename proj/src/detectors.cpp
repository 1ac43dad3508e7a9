// SPDX-License-Identifier: Apache-2.0
#include "mimo_ae/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mimo_ae {
namespace {

void check_shapes(const CMatrix& H, const CMatrix& Y, const char* who) {
  if (H.rows() != Y.rows()) {
    std::ostringstream os;
    os << who << ": H has " << H.rows() << " rows but Y has " << Y.rows();
    throw DimensionError(os.str());
  }
}

void check_diagonal(const CMatrix& A, const char* who) {
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    if (!(A(i, i).real() > 0.0)) {
      std::ostringstream os;
      os << who << ": Gram diagonal entry " << i
         << " is not positive (zero channel column?)";
      throw SingularityError(os.str());
    }
  }
}

CMatrix diagonal_solve(const CMatrix& A, const CMatrix& rhs) {
  CMatrix s(rhs.rows(), rhs.cols());
  for (Eigen::Index j = 0; j < rhs.cols(); ++j)
    for (Eigen::Index i = 0; i < rhs.rows(); ++i)
      s(i, j) = rhs(i, j) / A(i, i).real();
  return s;
}

}  // namespace

std::string to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::kMrc:
      return "mrc";
    case DetectorKind::kZf:
      return "zf";
    case DetectorKind::kGaussSeidel:
      return "gs";
    case DetectorKind::kAdmmGs:
      return "admm_gs";
  }
  return "unknown";
}

CMatrix matched_filter(const CMatrix& H, const CMatrix& Y) {
  check_shapes(H, Y, "matched_filter");
  return H.adjoint() * Y;
}

CMatrix gram(const CMatrix& H) {
  const CMatrix a = H.adjoint() * H;
  return (a + a.adjoint()) * 0.5;
}

DetectionResult mrc_detect(const CMatrix& H, const CMatrix& Y) {
  check_shapes(H, Y, "mrc_detect");
  const CMatrix A = gram(H);
  check_diagonal(A, "mrc_detect");
  return {diagonal_solve(A, matched_filter(H, Y)), DetectorKind::kMrc, 0};
}

DetectionResult zf_exact(const CMatrix& H, const CMatrix& Y, double loading) {
  check_shapes(H, Y, "zf_exact");
  CMatrix A = gram(H);
  A.diagonal().array() += loading;
  const Eigen::LDLT<CMatrix> ldlt(A);
  const double tol = 1e3 * std::numeric_limits<double>::epsilon();
  const RVector pivots = ldlt.vectorD().cwiseAbs();
  // LDLT solves skip zero pivots, so rcond alone misses exact rank loss.
  if (ldlt.info() != Eigen::Success || !(pivots.minCoeff() > tol * pivots.maxCoeff()) ||
      !(ldlt.rcond() > tol))
    throw SingularityError("zf_exact: Gram matrix is singular to working precision");
  return {ldlt.solve(matched_filter(H, Y)), DetectorKind::kZf, 0};
}

void gauss_seidel_sweeps(const CMatrix& A, const CMatrix& rhs, int sweeps,
                         CMatrix& s) {
  const Eigen::Index k = A.rows();
  for (int t = 0; t < sweeps; ++t) {
    for (Eigen::Index col = 0; col < rhs.cols(); ++col) {
      for (Eigen::Index i = 0; i < k; ++i) {
        Complex acc = rhs(i, col);
        for (Eigen::Index j = 0; j < k; ++j)
          if (j != i) acc -= A(i, j) * s(j, col);
        s(i, col) = acc / A(i, i).real();
      }
    }
  }
}

DetectionResult gs_detect(const CMatrix& H, const CMatrix& Y, int iterations,
                          double loading) {
  check_shapes(H, Y, "gs_detect");
  if (iterations < 0) throw ConfigError("gs_detect: iterations must be >= 0");
  CMatrix A = gram(H);
  A.diagonal().array() += loading;
  check_diagonal(A, "gs_detect");
  const CMatrix y_mf = matched_filter(H, Y);
  CMatrix s = diagonal_solve(A, y_mf);
  gauss_seidel_sweeps(A, y_mf, iterations, s);
  return {std::move(s), DetectorKind::kGaussSeidel, iterations};
}

double gs_spectral_radius(const CMatrix& A) {
  const CMatrix lower = A.triangularView<Eigen::Lower>();
  const CMatrix upper = A.triangularView<Eigen::StrictlyUpper>();
  const CMatrix G = -lower.triangularView<Eigen::Lower>().solve(upper);
  const Eigen::ComplexEigenSolver<CMatrix> es(G, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

ClusterPartition partition_clusters(const CMatrix& H, const CMatrix& Y, int c,
                                    double rho, int t_outer, int t_inner) {
  check_shapes(H, Y, "partition_clusters");
  if (c < 1 || H.rows() % c != 0) {
    std::ostringstream os;
    os << "partition_clusters: cluster count " << c
       << " does not divide antenna count " << H.rows();
    throw ConfigError(os.str());
  }
  ClusterPartition p;
  p.clusters = c;
  p.rho = rho;
  p.t_outer = t_outer;
  p.t_inner = t_inner;
  const Eigen::Index rows = H.rows() / c;
  for (int i = 0; i < c; ++i) {
    p.channels.push_back(H.middleRows(i * rows, rows));
    p.received.push_back(Y.middleRows(i * rows, rows));
  }
  return p;
}

DetectionResult admm_gs_detect(const ClusterPartition& p, AdmmTrace* trace) {
  const int c = p.clusters;
  if (c < 1 || static_cast<int>(p.channels.size()) != c ||
      static_cast<int>(p.received.size()) != c)
    throw ConfigError("admm_gs_detect: malformed cluster partition");
  if (p.rho < 0.0 || (p.rho == 0.0 && c != 1))
    throw ConfigError("admm_gs_detect: rho must be > 0 (0 allowed only for one cluster)");
  if (p.t_outer < 1 || p.t_inner < 1)
    throw ConfigError("admm_gs_detect: iteration counts must be >= 1");

  const Eigen::Index k = p.channels.front().cols();
  const Eigen::Index n = p.received.front().cols();
  std::vector<CMatrix> a(c), y_mf(c), s(c), u(c);
  for (int i = 0; i < c; ++i) {
    check_shapes(p.channels[i], p.received[i], "admm_gs_detect");
    a[i] = gram(p.channels[i]);
    a[i].diagonal().array() += p.rho;
    check_diagonal(a[i], "admm_gs_detect");
    y_mf[i] = matched_filter(p.channels[i], p.received[i]);
    u[i] = CMatrix::Zero(k, n);
    s[i] = diagonal_solve(a[i], y_mf[i]);  // z = u = 0 initially
  }
  CMatrix z = CMatrix::Zero(k, n);

  double first_residual = -1.0;
  for (int t = 0; t < p.t_outer; ++t) {
    // Local updates are independent across clusters.
    for (int i = 0; i < c; ++i) {
      const CMatrix rhs = y_mf[i] + p.rho * (z - u[i]);
      gauss_seidel_sweeps(a[i], rhs, p.t_inner, s[i]);
    }
    z = s[0] + u[0];
    for (int i = 1; i < c; ++i) z += s[i] + u[i];
    z /= static_cast<double>(c);

    double residual = 0.0;
    for (int i = 0; i < c; ++i) {
      u[i] += s[i] - z;
      residual = std::max(residual, (s[i] - z).norm());
    }
    if (trace) trace->consensus_residual.push_back(residual);
    if (first_residual < 0.0) {
      first_residual = residual;
    } else if (first_residual > 0.0 && residual > 10.0 * first_residual) {
      std::ostringstream os;
      os << "admm_gs_detect: consensus residual diverged at outer iteration "
         << t + 1 << " (" << residual << " > 10 x " << first_residual
         << "), rho=" << p.rho;
      throw ConvergenceError(os.str());
    }
  }
  return {std::move(z), DetectorKind::kAdmmGs, p.t_outer * p.t_inner};
}

double evm_percent(const CMatrix& s_hat, const CMatrix& s) {
  EvmAccumulator acc;
  acc.add(s_hat, s);
  return acc.percent();
}

void EvmAccumulator::add(const CMatrix& s_hat, const CMatrix& s) {
  require_dims(s_hat.rows() == s.rows() && s_hat.cols() == s.cols(),
               "evm: estimate and reference shapes differ");
  error_power += (s_hat - s).squaredNorm();
  reference_power += s.squaredNorm();
}

double EvmAccumulator::percent() const {
  if (!(reference_power > 0.0))
    throw std::domain_error("evm: reference power is zero");
  return 100.0 * std::sqrt(error_power / reference_power);
}

}  // namespace mimo_ae
