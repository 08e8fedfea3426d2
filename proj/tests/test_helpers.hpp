#pragma once
// Shared fixtures for the unit tests: the benchmark 5-asset covariance used
// by the bundled configs, its frozen closed-form optimum, and small scenario
// builders.

#include <Eigen/Dense>

#include "cvarsaa/market_models.hpp"

namespace testutil {

// Covariance of the bundled 5-line benchmark (configs/gaussian_unbounded.json).
inline Eigen::MatrixXd bench_sigma() {
  Eigen::MatrixXd s(5, 5);
  s << 4.490, -0.377, 0.059, 0.585, -1.709,
      -0.377, 6.109, -1.300, 0.229, 1.380,
      0.059, -1.300, 7.059, -1.401, 0.210,
      0.585, 0.229, -1.401, 8.400, -1.250,
      -1.709, 1.380, 0.210, -1.250, 19.934;
  return s;
}

inline cvarsaa::GaussianModel bench_model() {
  return cvarsaa::GaussianModel::unit_mean(bench_sigma());
}

// Frozen closed-form optimum of the benchmark at K = 100, alpha = 0.99
// (independent 40-digit evaluation of the formula, rounded to double).
inline Eigen::VectorXd bench_gamma_star() {
  Eigen::VectorXd g(5);
  g << 15.114754771706025, 12.57648416602627, 12.609376869529233,
      8.7005475510906604, 3.9579065286258811;
  return g;
}
constexpr double kBenchValueStar = -52.95906988697807;
constexpr double kBenchLambdaStar = 0.5295906988697807;
constexpr double kBenchSigmaS = 57.390910163736113;
constexpr double kBenchCltSigma = 161.9589176496264;  // analytic hinge-moment form

// Five-line multi-law market of the bundled configs: two Pareto-tailed
// lines, two lognormal, one gaussian.
inline std::vector<cvarsaa::MarginalSpec> bench_marginals() {
  using cvarsaa::MarginalSpec;
  return {MarginalSpec::make_gpd(0.45), MarginalSpec::make_gpd(0.25),
          MarginalSpec::make_lognormal(0.0, 1.7), MarginalSpec::make_lognormal(0.0, 1.3),
          MarginalSpec::make_gaussian(2.0, 6.0)};
}

// Copula correlation used by the gaussian-dependence config.
inline Eigen::MatrixXd bench_correlation() {
  Eigen::MatrixXd r(5, 5);
  r << 1, -0.1285, 0.3979, -0.4731, 0.3879,
      -0.1285, 1, -0.0574, -0.2253, -0.3532,
      0.3979, -0.0574, 1, -0.5363, 0.12,
      -0.4731, -0.2253, -0.5363, 1, 0.0999,
      0.3879, -0.3532, 0.12, 0.0999, 1;
  return r;
}

}  // namespace testutil
