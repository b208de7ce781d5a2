#pragma once

// Gaussian-process regression surrogate with a squared-exponential kernel.
// Inputs live in the unit hypercube; outputs are standardized internally.

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace tlsf {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GpHyper {
  double length_scale = 0.2;     // shared by every input dimension
  double signal_variance = 1.0;  // of the standardized outputs
  double noise_variance = 1e-6;
};

struct GpGrid {
  std::vector<double> length_scales{0.05, 0.1, 0.2, 0.4, 0.8};
  std::vector<double> noise_variances{1e-6, 1e-4, 1e-2};
};

struct GpPrediction {
  double mean = 0.0;
  double variance = 0.0;  // latent function variance, no observation noise
};

class GpModel {
 public:
  // Posterior in the caller's output units.
  GpPrediction predict(std::span<const double> x) const;
  // Posterior of the standardized outputs (zero-mean, unit-variance data).
  GpPrediction predict_standardized(std::span<const double> x) const;

  double kernel(std::span<const double> a, std::span<const double> b) const;

  const GpHyper& hyper() const noexcept { return hyper_; }
  double jitter() const noexcept { return jitter_; }
  double log_marginal_likelihood() const noexcept { return lml_; }
  const RowMatrix& inputs() const noexcept { return x_; }
  const Eigen::VectorXd& outputs() const noexcept { return y_; }
  double output_mean() const noexcept { return y_mean_; }
  double output_scale() const noexcept { return y_scale_; }
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  // Smallest standardized training output (the incumbent of a minimization).
  double best_standardized() const noexcept { return y_std_.minCoeff(); }

 private:
  friend GpModel gp_fit_fixed(const Eigen::MatrixXd&, const Eigen::VectorXd&, const GpHyper&);

  GpHyper hyper_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
  RowMatrix x_;  // one observation per contiguous row
  Eigen::VectorXd y_;
  Eigen::VectorXd y_std_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::MatrixXd chol_;  // lower factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_;
};

// Fits with the given hyperparameters. Rows of `x` are observations in
// [0,1]^d. A failing Cholesky factorization is retried with diagonal jitter
// 1e-10 .. 1e-4; NumericalError if all fail.
GpModel gp_fit_fixed(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyper& hyper);

// Picks the grid point of largest log marginal likelihood. The signal
// variance is the variance of the standardized outputs (1).
GpModel gp_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpGrid& grid = {});

}  // namespace tlsf
