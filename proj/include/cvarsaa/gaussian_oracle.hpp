#pragma once
// Closed form for the box-free CVaR-budget problem under X ~ N(1, Sigma):
//
//   max 1'gamma  s.t.  CVaR_alpha(-gamma'X) <= K
//
// has the unique solution  gamma* = sigma_S * Sigma^{-1} 1 / s  with
// s = sqrt(1' Sigma^{-1} 1),  sigma_S = K / (t_z(alpha) - s),  optimal value
// v* = -sigma_S * s and budget multiplier lambda* = s / (t_z(alpha) - s),
// valid whenever t_z(alpha) > s.  Also provides the (analytic and empirical)
// standard deviation of the CLT influence function  L + lambda (g - K)  used
// to normalize sqrt(n) (v_n - v*).

#include <Eigen/Dense>

#include "cvarsaa/market_models.hpp"
#include "cvarsaa/risk_measures.hpp"
#include "cvarsaa/saa_solver.hpp"

namespace cvarsaa {

struct GaussianSolution {
  Eigen::VectorXd gamma_star;
  double v_star = 0.0;
  double lambda_star = 0.0;
  double sigma_s = 0.0;    // optimal portfolio standard deviation
  double sigma_clt = 0.0;  // analytic influence-function std
};

Eigen::VectorXd optimal_gamma(double capital, const GaussianModel& model, TailLevel level);

// -gamma*' mean: strictly decreasing in capital.
double optimal_value(double capital, const GaussianModel& model, TailLevel level);

// Budget multiplier s / (t_z - s); independent of capital.
double lambda_star(const GaussianModel& model, TailLevel level);

GaussianSolution solve_gaussian(double capital, const GaussianModel& model, TailLevel level);

// sqrt Var(-m + sigma W + c sigma (W - z_alpha)^+) / normalization for a
// normal portfolio with std sigma_portfolio and budget multiplier lambda;
// reduces to sigma_portfolio at lambda == 0.
double analytic_clt_sigma(double sigma_portfolio, double lambda, TailLevel level);

// Empirical counterpart on a scenario set: sample std (ddof 1) of
// L_j + [c g_j] + lambda (g_j - K) evaluated at the given (gamma, zeta).
double clt_sigma(const AuxiliaryPoint& u, double lambda, double capital,
                 const ScenarioMatrix& scen, TailLevel level,
                 LossKind loss = LossKind::linear, double capital_cost = 0.0);

}  // namespace cvarsaa
