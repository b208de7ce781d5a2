#include "tlsf/gp.hpp"

#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>

#include "tlsf/error.hpp"

namespace tlsf {

double GpModel::kernel(std::span<const double> a, std::span<const double> b) const {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return hyper_.signal_variance * std::exp(-0.5 * d2 / (hyper_.length_scale * hyper_.length_scale));
}

GpPrediction GpModel::predict_standardized(std::span<const double> x) const {
  if (x.size() != dimension()) throw ValidationError("GP query has the wrong dimension");
  const Eigen::Index n = x_.rows();
  Eigen::VectorXd k(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k[i] = kernel(x, std::span<const double>(x_.row(i).data(), dimension()));
  }
  const double mean = k.dot(alpha_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const double var = std::max(hyper_.signal_variance - v.squaredNorm(), 0.0);
  return {mean, var};
}

GpPrediction GpModel::predict(std::span<const double> x) const {
  const GpPrediction p = predict_standardized(x);
  return {y_mean_ + y_scale_ * p.mean, y_scale_ * y_scale_ * p.variance};
}

GpModel gp_fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyper& hyper) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw ValidationError("GP needs at least one observation");
  if (y.size() != n) throw ValidationError("GP inputs and outputs differ in count");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("GP data must be finite");
  if ((x.array() < -1e-12).any() || (x.array() > 1.0 + 1e-12).any()) {
    throw ValidationError("GP inputs must lie in the unit hypercube");
  }
  if (!(hyper.length_scale > 0.0) || !(hyper.signal_variance > 0.0) || !(hyper.noise_variance >= 1e-10)) {
    throw ValidationError("GP hyperparameters out of range");
  }

  GpModel m;
  m.hyper_ = hyper;
  m.x_ = x;
  m.y_ = y;
  m.y_mean_ = y.mean();
  const double var = n > 1 ? (y.array() - m.y_mean_).square().sum() / static_cast<double>(n) : 0.0;
  m.y_scale_ = var > 1e-24 ? std::sqrt(var) : 1.0;
  m.y_std_ = (y.array() - m.y_mean_) / m.y_scale_;

  const auto d = static_cast<std::size_t>(x.cols());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double kij = m.kernel(std::span<const double>(m.x_.row(i).data(), d),
                                  std::span<const double>(m.x_.row(j).data(), d));
      gram(i, j) = kij;
      gram(j, i) = kij;
    }
  }

  static constexpr double kJitter[] = {0.0, 1e-10, 1e-8, 1e-6, 1e-4};
  for (double jitter : kJitter) {
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += hyper.noise_variance + jitter * hyper.signal_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) continue;
    const Eigen::MatrixXd l = llt.matrixL();
    if ((l.diagonal().array() <= 0.0).any() || !l.allFinite()) continue;
    m.jitter_ = jitter;
    m.chol_ = l;
    m.alpha_ = llt.solve(m.y_std_);
    m.lml_ = -0.5 * m.y_std_.dot(m.alpha_) - l.diagonal().array().log().sum() -
             0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return m;
  }
  throw NumericalError(fmt::format("GP gram matrix is singular after jitter escalation (n = {})", n));
}

GpModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpGrid& grid) {
  GpModel best;
  bool have = false;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double ell : grid.length_scales) {
    for (double noise : grid.noise_variances) {
      GpModel m;
      try {
        m = gp_fit_fixed(x, y, {ell, 1.0, noise});
      } catch (const NumericalError&) {
        continue;
      }
      if (!have || m.log_marginal_likelihood() > best_lml) {
        best_lml = m.log_marginal_likelihood();
        best = std::move(m);
        have = true;
      }
    }
  }
  if (!have) throw NumericalError("GP fit failed for every hyperparameter on the grid");
  return best;
}

}  // namespace tlsf
