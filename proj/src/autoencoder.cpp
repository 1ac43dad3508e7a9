// SPDX-License-Identifier: Apache-2.0
#include "mimo_ae/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace mimo_ae {
namespace {

constexpr double kKlClamp = 1e-12;

double kl_divergence(double rho, double rho_hat) {
  return rho * std::log(rho / rho_hat) +
         (1.0 - rho) * std::log((1.0 - rho) / (1.0 - rho_hat));
}

// Views into a flat parameter vector; layout matches pack_parameters.
struct ParamView {
  Eigen::Map<const RMatrix> w_enc;
  Eigen::Map<const RVector> b_enc;
  Eigen::Map<const RMatrix> w_dec;
  Eigen::Map<const RVector> b_dec;

  ParamView(const RVector& theta, Eigen::Index in, Eigen::Index lat)
      : w_enc(theta.data(), lat, in),
        b_enc(theta.data() + lat * in, lat),
        w_dec(theta.data() + lat * in + lat, in, lat),
        b_dec(theta.data() + 2 * lat * in + lat, in) {}
};

Eigen::Index parameter_count(Eigen::Index in, Eigen::Index lat) {
  return 2 * in * lat + in + lat;
}

// Loss and gradient over pre-scaled data; the optimizer's inner loop.
class SparseAeObjective {
 public:
  SparseAeObjective(RMatrix scaled, const AutoencoderConfig& cfg,
                    Eigen::Index latent)
      : xs_(std::move(scaled)), cfg_(cfg), latent_(latent) {}

  LossTerms terms(const RVector& theta) const {
    ParamView p(theta, xs_.rows(), latent_);
    hidden_ = logsig((p.w_enc * xs_).colwise() + p.b_enc);
    out_ = logsig((p.w_dec * hidden_).colwise() + p.b_dec);
    const double n = static_cast<double>(xs_.cols());

    LossTerms t;
    t.reconstruction = (xs_ - out_).squaredNorm() / n;
    t.l2 = cfg_.l2_coeff * (p.w_enc.squaredNorm() + p.w_dec.squaredNorm());
    rho_hat_ = (hidden_.rowwise().sum() / n)
                   .cwiseMax(kKlClamp)
                   .cwiseMin(1.0 - kKlClamp);
    double kl = 0.0;
    for (Eigen::Index j = 0; j < rho_hat_.size(); ++j)
      kl += kl_divergence(cfg_.sparsity_target, rho_hat_(j));
    t.sparsity = cfg_.sparsity_coeff * kl;
    return t;
  }

  double value(const RVector& theta) const { return terms(theta).total(); }

  double value_with_gradient(const RVector& theta, RVector& grad) const {
    const double e = value(theta);  // fills hidden_, out_, rho_hat_
    ParamView p(theta, xs_.rows(), latent_);
    const Eigen::Index in = xs_.rows();
    const double n = static_cast<double>(xs_.cols());

    grad.resize(parameter_count(in, latent_));
    Eigen::Map<RMatrix> g_w_enc(grad.data(), latent_, in);
    Eigen::Map<RVector> g_b_enc(grad.data() + latent_ * in, latent_);
    Eigen::Map<RMatrix> g_w_dec(grad.data() + latent_ * in + latent_, in,
                                latent_);
    Eigen::Map<RVector> g_b_dec(grad.data() + 2 * latent_ * in + latent_, in);

    // Output layer.
    const RMatrix delta_out =
        ((2.0 / n) * (out_ - xs_)).cwiseProduct(
            out_.cwiseProduct((1.0 - out_.array()).matrix()));
    g_w_dec.noalias() = delta_out * hidden_.transpose();
    g_w_dec += 2.0 * cfg_.l2_coeff * p.w_dec;
    g_b_dec = delta_out.rowwise().sum();

    // Hidden layer, including the sparsity term on the mean activation.
    const double rho = cfg_.sparsity_target;
    const RVector sparse_grad =
        (cfg_.sparsity_coeff / n) *
        (-rho / rho_hat_.array() + (1.0 - rho) / (1.0 - rho_hat_.array()))
            .matrix();
    RMatrix back = p.w_dec.transpose() * delta_out;
    back.colwise() += sparse_grad;
    const RMatrix delta_hidden = back.cwiseProduct(
        hidden_.cwiseProduct((1.0 - hidden_.array()).matrix()));
    g_w_enc.noalias() = delta_hidden * xs_.transpose();
    g_w_enc += 2.0 * cfg_.l2_coeff * p.w_enc;
    g_b_enc = delta_hidden.rowwise().sum();
    return e;
  }

 private:
  RMatrix xs_;
  AutoencoderConfig cfg_;
  Eigen::Index latent_;
  mutable RMatrix hidden_;
  mutable RMatrix out_;
  mutable RVector rho_hat_;
};

void check_model_dims(const AutoencoderModel& m) {
  const auto in = m.w_enc.cols();
  const auto lat = m.w_enc.rows();
  require_dims(m.b_enc.size() == lat && m.w_dec.rows() == in &&
                   m.w_dec.cols() == lat && m.b_dec.size() == in &&
                   m.feat_min.size() == in && m.feat_max.size() == in,
               "autoencoder model has inconsistent shapes");
}

}  // namespace

AutoencoderConfig AutoencoderConfig::for_antennas(int M, int n_div) {
  AutoencoderConfig c;
  c.input_dim = 2 * M;
  c.n_div = n_div;
  return c;
}

std::vector<std::string> AutoencoderConfig::violations() const {
  std::vector<std::string> out;
  if (input_dim < 1) out.push_back("input_dim must be >= 1");
  if (n_div < 1) {
    out.push_back("n_div must be >= 1 (got " + std::to_string(n_div) + ")");
  } else if (input_dim % n_div != 0) {
    out.push_back("n_div (" + std::to_string(n_div) +
                  ") must divide input_dim (" + std::to_string(input_dim) +
                  ")");
  } else if (latent_dim() < 1) {
    out.push_back("latent_dim must be >= 1");
  }
  if (!(sparsity_target > 0.0 && sparsity_target < 1.0))
    out.push_back("sparsity_target must lie in (0, 1)");
  if (l2_coeff < 0.0) out.push_back("l2_coeff must be >= 0");
  if (sparsity_coeff < 0.0) out.push_back("sparsity_coeff must be >= 0");
  if (max_epochs < 0) out.push_back("max_epochs must be >= 0");
  if (!(range_padding >= 0.0)) out.push_back("range_padding must be >= 0");
  return out;
}

void AutoencoderConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid autoencoder config:";
  for (const auto& m : v) os << "\n  - " << m;
  throw ConfigError(os.str());
}

AutoencoderModel AutoencoderModel::zeros(int input_dim, int latent_dim) {
  AutoencoderModel m;
  m.w_enc = RMatrix::Zero(latent_dim, input_dim);
  m.b_enc = RVector::Zero(latent_dim);
  m.w_dec = RMatrix::Zero(input_dim, latent_dim);
  m.b_dec = RVector::Zero(input_dim);
  m.feat_min = RVector::Zero(input_dim);
  m.feat_max = RVector::Ones(input_dim);
  return m;
}

double logsig(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RMatrix logsig(const RMatrix& x) {
  return x.unaryExpr([](double v) { return logsig(v); });
}

FeatureRange fit_scaling(const RMatrix& X, double padding) {
  require_dims(X.cols() >= 1, "fit_scaling: need at least one column");
  FeatureRange r;
  r.feat_min = X.rowwise().minCoeff();
  r.feat_max = X.rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < r.feat_min.size(); ++i)
    if (!(r.feat_max(i) > r.feat_min(i))) r.feat_max(i) = r.feat_min(i) + 1.0;
  if (padding > 0.0) {
    const RVector pad = padding * (r.feat_max - r.feat_min);
    r.feat_min -= pad;
    r.feat_max += pad;
  }
  return r;
}

RMatrix scale_columns(const RMatrix& X, const RVector& feat_min,
                      const RVector& feat_max) {
  require_dims(X.rows() == feat_min.size() && X.rows() == feat_max.size(),
               "scale_columns: feature count mismatch");
  const RVector inv_range = (feat_max - feat_min).cwiseInverse();
  RMatrix s = (X.colwise() - feat_min);
  s = inv_range.asDiagonal() * s;
  return s.cwiseMax(0.0).cwiseMin(1.0);
}

RMatrix unscale_columns(const RMatrix& Y, const RVector& feat_min,
                        const RVector& feat_max) {
  require_dims(Y.rows() == feat_min.size() && Y.rows() == feat_max.size(),
               "unscale_columns: feature count mismatch");
  RMatrix x = (feat_max - feat_min).asDiagonal() * Y;
  x.colwise() += feat_min;
  return x;
}

RMatrix encode_columns(const EncoderPart& enc, const RMatrix& X) {
  require_dims(X.rows() == enc.w_enc.cols(),
               "encode: input length " + std::to_string(X.rows()) +
                   " != input_dim " + std::to_string(enc.w_enc.cols()));
  const RMatrix xs = scale_columns(X, enc.feat_min, enc.feat_max);
  return logsig((enc.w_enc * xs).colwise() + enc.b_enc);
}

RVector encode(const EncoderPart& enc, const RVector& x) {
  return encode_columns(enc, x);
}

RVector encode(const AutoencoderModel& m, const RVector& x) {
  return encode(split(m).first, x);
}

RMatrix decode_columns(const DecoderPart& dec, const RMatrix& Z) {
  require_dims(Z.rows() == dec.w_dec.cols(),
               "decode: latent length " + std::to_string(Z.rows()) +
                   " != latent_dim " + std::to_string(dec.w_dec.cols()));
  const RMatrix y = logsig((dec.w_dec * Z).colwise() + dec.b_dec);
  return unscale_columns(y, dec.feat_min, dec.feat_max);
}

RVector decode(const DecoderPart& dec, const RVector& z) {
  return decode_columns(dec, z);
}

RVector decode(const AutoencoderModel& m, const RVector& z) {
  return decode(split(m).second, z);
}

LossTerms loss_terms(const AutoencoderModel& m, const RMatrix& X,
                     const AutoencoderConfig& cfg) {
  check_model_dims(m);
  require_dims(X.cols() >= 1, "loss: need at least one column");
  require_dims(X.rows() == m.input_dim(), "loss: input dimension mismatch");
  SparseAeObjective obj(scale_columns(X, m.feat_min, m.feat_max), cfg,
                        m.latent_dim());
  return obj.terms(pack_parameters(m));
}

double loss(const AutoencoderModel& m, const RMatrix& X,
            const AutoencoderConfig& cfg) {
  return loss_terms(m, X, cfg).total();
}

AutoencoderGradient gradient(const AutoencoderModel& m, const RMatrix& X,
                             const AutoencoderConfig& cfg) {
  check_model_dims(m);
  require_dims(X.cols() >= 1, "gradient: need at least one column");
  require_dims(X.rows() == m.input_dim(), "gradient: input dimension mismatch");
  SparseAeObjective obj(scale_columns(X, m.feat_min, m.feat_max), cfg,
                        m.latent_dim());
  RVector g;
  obj.value_with_gradient(pack_parameters(m), g);
  ParamView v(g, m.input_dim(), m.latent_dim());
  return {v.w_enc, v.b_enc, v.w_dec, v.b_dec};
}

RVector pack_parameters(const AutoencoderModel& m) {
  const Eigen::Index in = m.w_enc.cols(), lat = m.w_enc.rows();
  RVector theta(parameter_count(in, lat));
  theta << m.w_enc.reshaped(), m.b_enc, m.w_dec.reshaped(), m.b_dec;
  return theta;
}

void unpack_parameters(const RVector& theta, AutoencoderModel& m) {
  const Eigen::Index in = m.w_enc.cols(), lat = m.w_enc.rows();
  require_dims(theta.size() == parameter_count(in, lat),
               "unpack_parameters: length mismatch");
  ParamView v(theta, in, lat);
  m.w_enc = v.w_enc;
  m.b_enc = v.b_enc;
  m.w_dec = v.w_dec;
  m.b_dec = v.b_dec;
}

RVector pack_gradient(const AutoencoderGradient& g) {
  RVector theta(g.w_enc.size() + g.b_enc.size() + g.w_dec.size() +
                g.b_dec.size());
  theta << g.w_enc.reshaped(), g.b_enc, g.w_dec.reshaped(), g.b_dec;
  return theta;
}

AutoencoderModel initial_model(const RMatrix& X, const AutoencoderConfig& cfg,
                               Rng& rng) {
  cfg.validate();
  require_dims(X.rows() == cfg.input_dim,
               "train: X has " + std::to_string(X.rows()) +
                   " rows, expected input_dim " +
                   std::to_string(cfg.input_dim));
  const int in = cfg.input_dim, lat = cfg.latent_dim();
  AutoencoderModel m = AutoencoderModel::zeros(in, lat);
  const double bound = std::sqrt(6.0 / (in + lat));
  for (Eigen::Index j = 0; j < m.w_enc.cols(); ++j)
    for (Eigen::Index i = 0; i < m.w_enc.rows(); ++i)
      m.w_enc(i, j) = rng.uniform(-bound, bound);
  for (Eigen::Index j = 0; j < m.w_dec.cols(); ++j)
    for (Eigen::Index i = 0; i < m.w_dec.rows(); ++i)
      m.w_dec(i, j) = rng.uniform(-bound, bound);
  const FeatureRange r = fit_scaling(X, cfg.range_padding);
  m.feat_min = r.feat_min;
  m.feat_max = r.feat_max;
  return m;
}

AutoencoderModel train(const RMatrix& X, const AutoencoderConfig& cfg,
                       Rng& rng, TrainingReport* report) {
  require_dims(X.cols() >= 1, "train: need at least one training column");
  AutoencoderModel m = initial_model(X, cfg, rng);
  const SparseAeObjective obj(scale_columns(X, m.feat_min, m.feat_max), cfg,
                              m.latent_dim());

  ScgObjective f;
  f.value = [&obj](const RVector& t) { return obj.value(t); };
  f.value_with_gradient = [&obj](const RVector& t, RVector& g) {
    return obj.value_with_gradient(t, g);
  };
  ScgOptions opt;
  opt.max_epochs = cfg.max_epochs;
  opt.grad_tol = cfg.grad_tol;
  opt.loss_tol = cfg.loss_tol;

  ScgResult res = scg_minimize(f, pack_parameters(m), opt);
  unpack_parameters(res.x, m);
  if (report) {
    report->epochs = res.epochs;
    report->stop = res.stop;
    report->initial_loss = res.accepted_values.front();
    report->final_loss = res.value;
    report->accepted_losses = std::move(res.accepted_values);
  }
  return m;
}

std::pair<EncoderPart, DecoderPart> split(const AutoencoderModel& m) {
  return {EncoderPart{m.w_enc, m.b_enc, m.feat_min, m.feat_max},
          DecoderPart{m.w_dec, m.b_dec, m.feat_min, m.feat_max}};
}

AutoencoderModel merge(const EncoderPart& enc, const DecoderPart& dec) {
  if (enc.feat_min.size() != dec.feat_min.size() ||
      enc.feat_max.size() != dec.feat_max.size() ||
      enc.feat_min != dec.feat_min || enc.feat_max != dec.feat_max)
    throw ConsistencyError(
        "merge: encoder and decoder parts carry different input scaling");
  if (enc.w_enc.rows() != dec.w_dec.cols() ||
      enc.w_enc.cols() != dec.w_dec.rows())
    throw ConsistencyError("merge: encoder and decoder shapes disagree");
  AutoencoderModel m{enc.w_enc, enc.b_enc,    dec.w_dec,
                     dec.b_dec, enc.feat_min, enc.feat_max};
  check_model_dims(m);
  return m;
}

RMatrix rotation_augmented(const CMatrix& columns, int n_rotations) {
  require_dims(n_rotations >= 1, "rotation_augmented: n_rotations must be >= 1");
  CMatrix all(columns.rows(), columns.cols() * n_rotations);
  for (int r = 0; r < n_rotations; ++r) {
    const double phi = 2.0 * std::numbers::pi * r / n_rotations;
    // Exact multiples of pi/2 avoid round-off in the common 4-rotation case.
    Complex w = std::polar(1.0, phi);
    if (4 * r % n_rotations == 0) {
      static const Complex quarter[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
      w = quarter[(4 * r / n_rotations) % 4];
    }
    all.middleCols(r * columns.cols(), columns.cols()) = w * columns;
  }
  return stack_columns(all);
}

AutoencodedBlock autoencode_block(const EncoderPart& enc,
                                  const DecoderPart& dec,
                                  const ReceivedGrid& rx,
                                  std::uint64_t block_id) {
  require_dims(2 * rx.entries.rows() == enc.w_enc.cols(),
               "autoencode_block: antenna count does not match the model");
  AutoencodedBlock out;
  out.latent.block_id = block_id;
  out.latent.values = encode_columns(enc, stack_columns(rx.entries));
  out.reconstructed.entries =
      unstack_columns(decode_columns(dec, out.latent.values));
  out.reconstructed.noise_var = rx.noise_var;
  return out;
}

AutoencodedBlock autoencode_block(const AutoencoderModel& m,
                                  const ReceivedGrid& rx,
                                  std::uint64_t block_id) {
  const auto [enc, dec] = split(m);
  return autoencode_block(enc, dec, rx, block_id);
}

}  // namespace mimo_ae
