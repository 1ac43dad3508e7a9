// SPDX-License-Identifier: Apache-2.0
#include "mimo_ae/scg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace mimo_ae {
namespace {

constexpr double kLambdaMin = 1e-15;
constexpr double kLambdaMax = 1e100;

void check_finite(double e, const RVector& g, int epoch, const char* where) {
  if (std::isfinite(e) && g.allFinite()) return;
  std::ostringstream os;
  os << "scg: non-finite " << (std::isfinite(e) ? "gradient" : "objective")
     << " at epoch " << epoch << " (" << where << "), value=" << e;
  throw TrainingError(os.str());
}

}  // namespace

std::string to_string(ScgStop s) {
  switch (s) {
    case ScgStop::kMaxEpochs:
      return "max_epochs";
    case ScgStop::kGradient:
      return "gradient_tol";
    case ScgStop::kLossChange:
      return "loss_tol";
    case ScgStop::kZeroStep:
      return "zero_step";
  }
  return "unknown";
}

ScgResult scg_minimize(const ScgObjective& f, RVector x0,
                       const ScgOptions& opt) {
  const Eigen::Index n = x0.size();
  ScgResult res;
  res.x = std::move(x0);

  RVector g(n), g_old(n), g_plus(n);
  double e = f.value_with_gradient(res.x, g);
  check_finite(e, g, 0, "initial point");
  res.accepted_values.push_back(e);

  RVector p = -g;  // search direction
  double lambda = opt.lambda0;
  bool success = true;
  Eigen::Index n_success = 0;
  double mu = 0.0, kappa = 0.0, curvature = 0.0;

  if (g.norm() < opt.grad_tol) {
    res.value = e;
    res.stop = ScgStop::kGradient;
    return res;
  }

  for (int epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    res.epochs = epoch;
    if (success) {
      mu = p.dot(-g);
      if (mu <= 0.0) {  // not a descent direction; restart
        p = -g;
        mu = p.dot(-g);
      }
      kappa = p.squaredNorm();
      if (kappa < std::numeric_limits<double>::epsilon()) {
        res.stop = ScgStop::kZeroStep;
        break;
      }
      // Second-order information by a finite difference along p.
      const double sigma = opt.sigma0 / std::sqrt(kappa);
      const RVector x_probe = res.x + sigma * p;
      f.value_with_gradient(x_probe, g_plus);
      check_finite(0.0, g_plus, epoch, "curvature probe");
      curvature = p.dot(g_plus - g) / sigma;
    }

    // Scale: make the local model positive definite.
    double delta = curvature + lambda * kappa;
    if (delta <= 0.0) {
      delta = lambda * kappa;
      lambda -= curvature / kappa;
    }
    const double alpha = mu / delta;

    const RVector x_new = res.x + alpha * p;
    const double e_new = f.value(x_new);
    // Comparison ratio between actual and predicted reduction.
    const double comparison = 2.0 * (e - e_new) / (alpha * mu);

    if (std::isfinite(e_new) && comparison >= 0.0) {
      success = true;
      ++n_success;
      const double e_prev = e;
      res.x = x_new;
      e = e_new;
      res.accepted_values.push_back(e);
      g_old = g;
      e = f.value_with_gradient(res.x, g);
      check_finite(e, g, epoch, "accepted step");
      const double rel_change =
          std::abs(e_prev - e) / std::max(std::abs(e_prev), 1e-300);
      if (g.norm() < opt.grad_tol) {
        res.stop = ScgStop::kGradient;
        break;
      }
      if (rel_change < opt.loss_tol) {
        res.stop = ScgStop::kLossChange;
        break;
      }
    } else {
      success = false;
    }

    if (comparison < 0.25) lambda = std::min(4.0 * lambda, kLambdaMax);
    if (comparison > 0.75) lambda = std::max(0.5 * lambda, kLambdaMin);

    if (n_success == n) {
      p = -g;
      n_success = 0;
    } else if (success) {
      // Polak-Ribiere update.
      const double beta = (g - g_old).dot(g) / mu;
      p = beta * p - g;
    }
  }
  res.value = e;
  return res;
}

}  // namespace mimo_ae
