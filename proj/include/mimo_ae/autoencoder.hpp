// SPDX-License-Identifier: Apache-2.0
//
// Single-hidden-layer sparse autoencoder with logistic-sigmoid encoder and
// decoder, trained per coherence block. The encoder half runs at the radio
// head and the decoder half at the central unit; both carry the min-max input
// scaling learned from the training columns.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mimo_ae/rng.hpp"
#include "mimo_ae/scg.hpp"
#include "mimo_ae/signal_model.hpp"
#include "mimo_ae/types.hpp"

namespace mimo_ae {

class ConsistencyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AutoencoderConfig {
  int input_dim = 128;  // 2M
  int n_div = 8;
  double l2_coeff = 0.001;
  double sparsity_coeff = 1.0;
  double sparsity_target = 0.05;
  int max_epochs = 10000;
  double grad_tol = 1e-6;
  double loss_tol = 1e-10;
  // Fraction of each feature's training range added on both sides before
  // mapping to [0, 1].
  double range_padding = 0.0;

  int latent_dim() const { return n_div > 0 ? input_dim / n_div : 0; }

  static AutoencoderConfig for_antennas(int M, int n_div);

  std::vector<std::string> violations() const;
  void validate() const;
};

struct EncoderPart {
  RMatrix w_enc;  // latent x input
  RVector b_enc;
  RVector feat_min;
  RVector feat_max;
};

struct DecoderPart {
  RMatrix w_dec;  // input x latent
  RVector b_dec;
  RVector feat_min;
  RVector feat_max;
};

struct AutoencoderModel {
  RMatrix w_enc;  // latent x input
  RVector b_enc;
  RMatrix w_dec;  // input x latent
  RVector b_dec;
  RVector feat_min;
  RVector feat_max;

  int input_dim() const { return static_cast<int>(w_enc.cols()); }
  int latent_dim() const { return static_cast<int>(w_enc.rows()); }

  /// Zero weights and biases, unit scaling range [0, 1].
  static AutoencoderModel zeros(int input_dim, int latent_dim);

  bool operator==(const AutoencoderModel&) const = default;
};

/// Same shape as the trainable parameters of AutoencoderModel.
struct AutoencoderGradient {
  RMatrix w_enc;
  RVector b_enc;
  RMatrix w_dec;
  RVector b_dec;
};

struct LatentGrid {
  std::uint64_t block_id = 0;
  RMatrix values;  // latent x n_re, entries in (0, 1)
};

/// 1 / (1 + exp(-x)) without overflow for large |x|.
double logsig(double x);
RMatrix logsig(const RMatrix& x);

struct FeatureRange {
  RVector feat_min;
  RVector feat_max;
};

/// Per-row min and max over the columns of X. Rows with max == min are
/// widened to [min, min + 1]; then `padding * (max - min)` is added on both
/// sides.
FeatureRange fit_scaling(const RMatrix& X, double padding = 0.0);

/// (x - min) / (max - min), clamped to [0, 1].
RMatrix scale_columns(const RMatrix& X, const RVector& feat_min,
                      const RVector& feat_max);
RMatrix unscale_columns(const RMatrix& Y, const RVector& feat_min,
                        const RVector& feat_max);

RVector encode(const EncoderPart& enc, const RVector& x);
RVector encode(const AutoencoderModel& m, const RVector& x);
RMatrix encode_columns(const EncoderPart& enc, const RMatrix& X);

RVector decode(const DecoderPart& dec, const RVector& z);
RVector decode(const AutoencoderModel& m, const RVector& z);
RMatrix decode_columns(const DecoderPart& dec, const RMatrix& Z);

struct LossTerms {
  double reconstruction = 0.0;  // squared error summed over features, mean over samples
  double l2 = 0.0;              // lambda * (||W_enc||^2 + ||W_dec||^2)
  double sparsity = 0.0;        // beta * sum_j KL(rho || rho_hat_j)
  double total() const { return reconstruction + l2 + sparsity; }
};

/// Regularized loss of X (raw, unscaled columns) under the model's scaling.
/// Mean hidden activations are clamped to [1e-12, 1 - 1e-12] inside the KL
/// term; the gradient treats the clamp as transparent.
LossTerms loss_terms(const AutoencoderModel& m, const RMatrix& X,
                     const AutoencoderConfig& cfg);
double loss(const AutoencoderModel& m, const RMatrix& X,
            const AutoencoderConfig& cfg);
AutoencoderGradient gradient(const AutoencoderModel& m, const RMatrix& X,
                             const AutoencoderConfig& cfg);

/// Flat parameter packing used by the optimizer:
/// [w_enc (col-major), b_enc, w_dec (col-major), b_dec].
RVector pack_parameters(const AutoencoderModel& m);
void unpack_parameters(const RVector& theta, AutoencoderModel& m);
RVector pack_gradient(const AutoencoderGradient& g);

/// Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases, scaling fit
/// to X.
AutoencoderModel initial_model(const RMatrix& X, const AutoencoderConfig& cfg,
                               Rng& rng);

struct TrainingReport {
  int epochs = 0;
  ScgStop stop = ScgStop::kMaxEpochs;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> accepted_losses;
};

/// Full-batch SCG training from a seeded initialization. X is input_dim x N
/// with N >= 1.
AutoencoderModel train(const RMatrix& X, const AutoencoderConfig& cfg,
                       Rng& rng, TrainingReport* report = nullptr);

std::pair<EncoderPart, DecoderPart> split(const AutoencoderModel& m);
/// Throws ConsistencyError when the parts disagree on scaling or shapes.
AutoencoderModel merge(const EncoderPart& enc, const DecoderPart& dec);

/// Columns y, j*y, -y, -j*y, ... : n_rotations equally spaced phase
/// rotations of every training column, stacked to real form.
RMatrix rotation_augmented(const CMatrix& columns, int n_rotations);

struct AutoencodedBlock {
  LatentGrid latent;
  ReceivedGrid reconstructed;
};

/// Stacks, encodes, decodes and unstacks every column of rx.
AutoencodedBlock autoencode_block(const AutoencoderModel& m,
                                  const ReceivedGrid& rx,
                                  std::uint64_t block_id);
AutoencodedBlock autoencode_block(const EncoderPart& enc,
                                  const DecoderPart& dec,
                                  const ReceivedGrid& rx,
                                  std::uint64_t block_id);

}  // namespace mimo_ae
