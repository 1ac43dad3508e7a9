// SPDX-License-Identifier: Apache-2.0
//
// Scaled conjugate gradient (Moller, 1993) for smooth unconstrained
// minimization. Full-batch; only improving steps are accepted, so the
// sequence of accepted objective values is non-increasing.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mimo_ae/types.hpp"

namespace mimo_ae {

struct ScgOptions {
  int max_epochs = 10000;
  double grad_tol = 1e-6;   // stop when ||g|| < grad_tol
  double loss_tol = 1e-10;  // stop when |dE| / max(|E|, tiny) < loss_tol
  double sigma0 = 1e-5;
  double lambda0 = 1e-7;
};

enum class ScgStop { kMaxEpochs, kGradient, kLossChange, kZeroStep };

std::string to_string(ScgStop s);

struct ScgResult {
  RVector x;
  double value = 0.0;
  int epochs = 0;
  ScgStop stop = ScgStop::kMaxEpochs;
  std::vector<double> accepted_values;  // initial value first
};

/// Objective interface: value(x) and value_with_gradient(x, g).
struct ScgObjective {
  std::function<double(const RVector&)> value;
  std::function<double(const RVector&, RVector&)> value_with_gradient;
};

/// Throws TrainingError if a non-finite objective value or gradient appears.
ScgResult scg_minimize(const ScgObjective& f, RVector x0,
                       const ScgOptions& opt);

}  // namespace mimo_ae
