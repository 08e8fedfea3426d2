#pragma once
// Empirical VaR / CVaR, the auxiliary function
//   g_N(gamma, zeta) = zeta + (N(1-alpha))^-1 sum_j (-gamma'X_j - zeta)^+
// whose minimum over zeta is the empirical CVaR, exact subgradients of g_N,
// and the analytic Gaussian portfolio CVaR.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvarsaa/market_models.hpp"
#include "cvarsaa/stats.hpp"

namespace cvarsaa {

struct TailLevel {
  double alpha = 0.99;
  TailLevel() = default;
  explicit TailLevel(double a) : alpha(a) {
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("tail level must lie in (0,1)");
  }
};

struct AuxiliaryPoint {
  Eigen::VectorXd gamma;
  double zeta = 0.0;
};

inline double t_z(TailLevel level) { return stats::t_z(level.alpha); }

// ceil(alpha*n) with a guard against FP round-up at exact integers.
inline Eigen::Index var_order_index(Eigen::Index n, double alpha) {
  const double m = std::ceil(alpha * double(n) * (1.0 - 1e-13));
  return std::max<Eigen::Index>(Eigen::Index(1), Eigen::Index(m));
}

namespace detail {

template <class Derived>
std::vector<double> to_vector(const Eigen::MatrixBase<Derived>& v) {
  if (v.rows() != 1 && v.cols() != 1)
    throw std::invalid_argument("expected a vector of losses");
  std::vector<double> out(std::size_t(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) out[std::size_t(i)] = v(i);
  return out;
}

}  // namespace detail

// Smallest M with empirical P(loss <= M) >= alpha: the ceil(alpha N)-th
// order statistic (left endpoint of the argmin interval of g_N over zeta).
template <class Derived>
double empirical_var(const Eigen::MatrixBase<Derived>& losses, TailLevel level) {
  if (losses.size() == 0) throw std::invalid_argument("empirical_var: empty loss vector");
  std::vector<double> work = detail::to_vector(losses);
  const Eigen::Index m = var_order_index(Eigen::Index(work.size()), level.alpha);
  std::nth_element(work.begin(), work.begin() + (m - 1), work.end());
  return work[std::size_t(m - 1)];
}

// min over zeta of g_N, attained at zeta = empirical_var: one partition pass.
template <class Derived>
double empirical_cvar(const Eigen::MatrixBase<Derived>& losses, TailLevel level) {
  if (losses.size() == 0) throw std::invalid_argument("empirical_cvar: empty loss vector");
  std::vector<double> work = detail::to_vector(losses);
  const Eigen::Index n = Eigen::Index(work.size());
  const Eigen::Index m = var_order_index(n, level.alpha);
  std::nth_element(work.begin(), work.begin() + (m - 1), work.end());
  const double var = work[std::size_t(m - 1)];
  double excess = 0.0;  // elements before the pivot are <= var: zero hinge
  for (Eigen::Index i = m; i < n; ++i) excess += work[std::size_t(i)] - var;
  return var + excess / (double(n) * (1.0 - level.alpha));
}

template <class Derived>
double g_emp(const AuxiliaryPoint& u, const Eigen::MatrixBase<Derived>& scen,
             TailLevel level) {
  if (scen.cols() != u.gamma.size())
    throw std::invalid_argument("g_emp: scenario/portfolio dimension mismatch");
  const double q = 1.0 / (double(scen.rows()) * (1.0 - level.alpha));
  const Eigen::ArrayXd losses = -(scen.derived() * u.gamma).array();
  return u.zeta + q * (losses - u.zeta).max(0.0).sum();
}

inline double g_emp(const AuxiliaryPoint& u, const ScenarioMatrix& scen, TailLevel level) {
  return g_emp(u, scen.data, level);
}

// Exact subgradient of g_N at u, packed as (d+1)-vector [d/dgamma; d/dzeta].
// The active set uses the strict inequality -gamma'X - zeta > 0, so this is
// the gradient off the kink set.
template <class Derived>
Eigen::VectorXd g_subgradient(const AuxiliaryPoint& u,
                              const Eigen::MatrixBase<Derived>& scen, TailLevel level) {
  const Eigen::Index d = u.gamma.size();
  if (scen.cols() != d)
    throw std::invalid_argument("g_subgradient: scenario/portfolio dimension mismatch");
  const double q = 1.0 / (double(scen.rows()) * (1.0 - level.alpha));
  const Eigen::ArrayXd losses = -(scen.derived() * u.gamma).array();
  const Eigen::VectorXd active =
      (losses > u.zeta).template cast<double>().matrix();
  Eigen::VectorXd sub(d + 1);
  sub.head(d) = -q * (scen.derived().transpose() * active);
  sub[d] = 1.0 - q * active.sum();
  return sub;
}

inline Eigen::VectorXd g_subgradient(const AuxiliaryPoint& u, const ScenarioMatrix& scen,
                                     TailLevel level) {
  return g_subgradient(u, scen.data, level);
}

// CVaR_alpha(-gamma'X) for X ~ N(mean, Sigma):
//   -gamma'mean + t_z(alpha) * sqrt(gamma' Sigma gamma).
inline double gaussian_cvar(const Eigen::VectorXd& gamma, const GaussianModel& model,
                            TailLevel level) {
  model.validate();
  if (gamma.size() != model.dim())
    throw std::invalid_argument("gaussian_cvar: dimension mismatch");
  const double variance = gamma.dot(model.sigma * gamma);
  return -gamma.dot(model.mean) + stats::t_z(level.alpha) * std::sqrt(std::max(variance, 0.0));
}

}  // namespace cvarsaa
