#include "cvarsaa/gaussian_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "cvarsaa/stats.hpp"

namespace cvarsaa {
namespace {

// Returns s = sqrt(1' Sigma^{-1} 1) and w = Sigma^{-1} 1 via Cholesky.
double inverse_row_sums(const GaussianModel& model, Eigen::VectorXd& w) {
  model.validate();
  if ((model.mean.array() - 1.0).abs().maxCoeff() > 1e-12)
    throw std::domain_error("closed form requires unit means; rescale the model");
  Eigen::LLT<Eigen::MatrixXd> llt(model.sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("covariance not SPD");
  w = llt.solve(Eigen::VectorXd::Ones(model.dim()));
  return std::sqrt(w.sum());
}

}  // namespace

Eigen::VectorXd optimal_gamma(double capital, const GaussianModel& model, TailLevel level) {
  if (!(capital > 0.0)) throw std::domain_error("capital budget must be positive");
  Eigen::VectorXd w;
  const double s = inverse_row_sums(model, w);
  const double t = stats::t_z(level.alpha);
  if (!(t > s)) throw std::domain_error("risk level too low for closed form");
  return (capital / ((t - s) * s)) * w;
}

double optimal_value(double capital, const GaussianModel& model, TailLevel level) {
  return -optimal_gamma(capital, model, level).dot(model.mean);
}

double lambda_star(const GaussianModel& model, TailLevel level) {
  Eigen::VectorXd w;
  const double s = inverse_row_sums(model, w);
  const double t = stats::t_z(level.alpha);
  if (!(t > s)) throw std::domain_error("risk level too low for closed form");
  return s / (t - s);
}

GaussianSolution solve_gaussian(double capital, const GaussianModel& model, TailLevel level) {
  GaussianSolution sol;
  sol.gamma_star = optimal_gamma(capital, model, level);
  Eigen::VectorXd w;
  const double s = inverse_row_sums(model, w);
  const double t = stats::t_z(level.alpha);
  sol.sigma_s = capital / (t - s);
  sol.lambda_star = s / (t - s);
  sol.v_star = -sol.gamma_star.sum();
  sol.sigma_clt = analytic_clt_sigma(sol.sigma_s, sol.lambda_star, level);
  return sol;
}

double analytic_clt_sigma(double sigma_portfolio, double lambda, TailLevel level) {
  if (!(sigma_portfolio >= 0.0))
    throw std::invalid_argument("portfolio std must be nonnegative");
  const double a = stats::norm_quantile(level.alpha);
  const double c = lambda / (1.0 - level.alpha);
  const double variance = 1.0 + 2.0 * c * (1.0 - level.alpha) +
                          c * c * stats::hinge_sq(a) -
                          std::pow(c * stats::hinge_mean(a), 2);
  return sigma_portfolio * std::sqrt(variance);
}

double clt_sigma(const AuxiliaryPoint& u, double lambda, double capital,
                 const ScenarioMatrix& scen, TailLevel level, LossKind loss,
                 double capital_cost) {
  if (scen.dim() != u.gamma.size())
    throw std::invalid_argument("clt_sigma: dimension mismatch");
  if (scen.n() < 2) throw std::invalid_argument("clt_sigma: need at least 2 scenarios");
  const Eigen::ArrayXd losses = -(scen.data * u.gamma).array();
  const double q = 1.0 / (1.0 - level.alpha);
  const Eigen::ArrayXd g = u.zeta + q * (losses - u.zeta).max(0.0);
  Eigen::ArrayXd h = losses + lambda * (g - capital);
  if (loss == LossKind::cost_of_capital) h += capital_cost * g;
  const double mean = h.mean();
  return std::sqrt((h - mean).square().sum() / double(scen.n() - 1));
}

}  // namespace cvarsaa
