#include "cvarsaa/saa_solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "cvarsaa/simplex.hpp"

namespace cvarsaa {
namespace {

Eigen::ArrayXd portfolio_losses(const ScenarioMatrix& scen, const Eigen::VectorXd& gamma) {
  return -(scen.data * gamma).array();
}

Eigen::VectorXd clamp_to_box(const ProblemSpec& spec, Eigen::VectorXd gamma) {
  return gamma.cwiseMax(spec.gamma_low).cwiseMin(spec.gamma_up);
}

// Re-optimizes zeta exactly (the empirical VaR minimizes g over zeta), then
// reports value/duals/diagnostics at the clamped point.  `reduced` carries
// the master/epigraph LP reduced costs for the first dim() columns; null
// leaves the bound duals at zero (grid solver).
Solution finalize(const SaaProblem& p, Eigen::VectorXd gamma, double lambda,
                  const Eigen::VectorXd* reduced, long iterations, long cuts,
                  const char* solver) {
  Solution s;
  s.gamma = clamp_to_box(p.spec, std::move(gamma));
  const Eigen::ArrayXd losses = portfolio_losses(p.scen, s.gamma);
  s.zeta = empirical_var(losses.matrix(), p.spec.alpha);
  const double g = empirical_cvar(losses.matrix(), p.spec.alpha);
  s.value = -p.scen.column_means.dot(s.gamma);
  if (p.spec.loss == LossKind::cost_of_capital) s.value += p.spec.capital_cost * g;
  s.lambda = lambda;
  s.bound_dual_low = Eigen::VectorXd::Zero(p.dim());
  s.bound_dual_up = Eigen::VectorXd::Zero(p.dim());
  if (reduced) {
    s.bound_dual_low = reduced->head(p.dim()).cwiseMax(0.0);
    s.bound_dual_up = (-reduced->head(p.dim())).cwiseMax(0.0);
  }
  s.iterations = iterations;
  s.cuts = cuts;
  s.constraint_residual = g - p.spec.capital;
  s.compl_slack = std::abs(lambda * s.constraint_residual);
  s.active_constraint =
      std::abs(s.constraint_residual) <= 1e-6 * std::max(1.0, std::abs(p.spec.capital));
  s.small_tail = p.small_tail;
  s.solver = solver;
  return s;
}

// g_N and its subgradient at u in one pass over the scenarios.
struct GEval {
  double g = 0.0;
  Eigen::VectorXd sub;  // (d+1): [d/dgamma; d/dzeta]
};

GEval evaluate_g(const SaaProblem& p, const AuxiliaryPoint& u) {
  const double q = 1.0 / (double(p.n()) * (1.0 - p.spec.alpha.alpha));
  const Eigen::ArrayXd losses = portfolio_losses(p.scen, u.gamma);
  const Eigen::ArrayXd excess = losses - u.zeta;
  GEval e;
  e.g = u.zeta + q * excess.max(0.0).sum();
  const Eigen::VectorXd active = (excess > 0.0).cast<double>().matrix();
  e.sub.resize(p.dim() + 1);
  e.sub.head(p.dim()).noalias() = -q * (p.scen.data.transpose() * active);
  e.sub[p.dim()] = 1.0 - q * active.sum();
  return e;
}

// lambda from the stationarity identity xbar_j = (lambda + c) dg/dgamma_j at
// a strictly interior coordinate; empty when none qualifies.
std::optional<double> formula_lambda(const SaaProblem& p, const Eigen::VectorXd& gamma,
                                     double zeta, Eigen::Index* coord = nullptr) {
  const GEval e = evaluate_g(p, {gamma, zeta});
  Eigen::Index best = -1;
  double best_mag = 1e-12;
  for (Eigen::Index j = 0; j < p.dim(); ++j) {
    const double margin = 1e-6 * std::max(1.0, p.spec.gamma_up[j] - p.spec.gamma_low[j]);
    if (gamma[j] < p.spec.gamma_low[j] + margin) continue;
    if (gamma[j] > p.spec.gamma_up[j] - margin) continue;
    if (std::abs(e.sub[j]) > best_mag) {
      best_mag = std::abs(e.sub[j]);
      best = j;
    }
  }
  if (best < 0) return std::nullopt;
  if (coord) *coord = best;
  double lam = p.scen.column_means[best] / e.sub[best];
  if (p.spec.loss == LossKind::cost_of_capital) lam -= p.spec.capital_cost;
  return lam;
}

}  // namespace

void ProblemSpec::validate() const {
  if (gamma_low.size() == 0 || gamma_low.size() != gamma_up.size())
    throw std::invalid_argument("portfolio box: bound vectors empty or mismatched");
  if (!gamma_low.allFinite() || !gamma_up.allFinite())
    throw std::invalid_argument("portfolio box: bounds must be finite");
  if ((gamma_low.array() < 0.0).any())
    throw std::invalid_argument("portfolio box: weights must be nonnegative");
  if ((gamma_low.array() > gamma_up.array()).any())
    throw std::invalid_argument("portfolio box: lower bound exceeds upper bound");
  if (!(alpha.alpha > 0.0 && alpha.alpha < 1.0))
    throw std::invalid_argument("tail level must lie in (0,1)");
  if (!(std::isfinite(capital) && capital > 0.0))
    throw std::invalid_argument("capital budget must be positive");
  if (loss == LossKind::cost_of_capital &&
      !(capital_cost > 0.0 && capital_cost < 1.0))
    throw std::invalid_argument("capital cost must lie in (0,1)");
  if (zeta_low && zeta_up && *zeta_low > *zeta_up)
    throw std::invalid_argument("zeta bounds: lower exceeds upper");
}

SaaProblem assemble_problem(ProblemSpec spec, ScenarioMatrix scen) {
  spec.validate();
  if (scen.dim() != spec.dim())
    throw std::invalid_argument("scenario dimension does not match portfolio box");
  const double tail = double(scen.n()) * (1.0 - spec.alpha.alpha);
  if (tail < 2.0) throw std::invalid_argument("sample too small for tail level");

  SaaProblem p;
  p.small_tail = tail < 10.0;
  // Exact range of the loss -X_j' gamma over the box, per scenario.
  const Eigen::ArrayXXd neg = -scen.data.array();
  const Eigen::ArrayXXd at_lo = neg.rowwise() * spec.gamma_low.transpose().array();
  const Eigen::ArrayXXd at_up = neg.rowwise() * spec.gamma_up.transpose().array();
  const double auto_lo = at_lo.min(at_up).rowwise().sum().minCoeff();
  const double auto_up = at_lo.max(at_up).rowwise().sum().maxCoeff();
  p.zeta_low = spec.zeta_low.value_or(auto_lo);
  p.zeta_up = spec.zeta_up.value_or(auto_up);
  if (p.zeta_low > p.zeta_up)
    throw std::invalid_argument("zeta bounds: lower exceeds upper");
  p.spec = std::move(spec);
  p.scen = std::move(scen);
  return p;
}

Solution solve_cutting_plane(const SaaProblem& p, double tol, long max_cuts) {
  const Eigen::Index d = p.dim();
  const bool coc = p.spec.loss == LossKind::cost_of_capital;
  const Eigen::Index nv = d + 1 + (coc ? 1 : 0);
  const double cap = p.spec.capital;
  const double feas_tol = tol * std::max(1.0, std::abs(cap));

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(nv);
  cost.head(d) = -p.scen.column_means;
  if (coc) cost[nv - 1] = p.spec.capital_cost;
  Eigen::VectorXd xlo(nv), xup(nv);
  xlo.head(d) = p.spec.gamma_low;
  xup.head(d) = p.spec.gamma_up;
  xlo[d] = p.zeta_low;
  xup[d] = p.zeta_up;
  if (coc) {
    xlo[nv - 1] = -lp::kInf;
    xup[nv - 1] = lp::kInf;
  }

  const long cap_rows = (coc ? 2 : 1) * max_cuts + 2;
  Eigen::MatrixXd rows(cap_rows, nv);
  Eigen::VectorXd rhs(cap_rows);
  std::vector<char> is_budget_cut;
  Eigen::Index nrows = 0;

  auto add_cuts = [&](const AuxiliaryPoint& u, const GEval& e) {
    Eigen::VectorXd uvec(d + 1);
    uvec.head(d) = u.gamma;
    uvec[d] = u.zeta;
    const double base = e.sub.dot(uvec) - e.g;
    rows.row(nrows).setZero();
    rows.row(nrows).head(d + 1) = e.sub;
    rhs[nrows] = cap + base;  // g(u') <= K linearized at u
    is_budget_cut.push_back(1);
    ++nrows;
    if (coc) {
      rows.row(nrows).head(d + 1) = e.sub;
      rows(nrows, nv - 1) = -1.0;
      rhs[nrows] = base;  // tau >= linearization of g
      is_budget_cut.push_back(0);
      ++nrows;
    }
  };

  AuxiliaryPoint u;
  u.gamma = p.spec.gamma_low;
  u.zeta = empirical_var(portfolio_losses(p.scen, u.gamma).matrix(), p.spec.alpha);
  add_cuts(u, evaluate_g(p, u));

  bool have_best = false;
  double best_obj = lp::kInf;
  Eigen::VectorXd best_gamma;
  long it = 0;
  lp::Result res;
  while (it < max_cuts && nrows + 2 <= cap_rows) {
    lp::Lp master;
    master.A = rows.topRows(nrows);
    master.c = cost;
    master.xlo = xlo;
    master.xup = xup;
    master.rlo = Eigen::VectorXd::Constant(nrows, -lp::kInf);
    master.rup = rhs.head(nrows);
    res = lp::solve(master);
    ++it;
    if (res.status == lp::Status::infeasible) throw InfeasibleError("empty feasible set");
    if (res.status != lp::Status::optimal)
      throw ConvergenceError("master LP stalled",
                             finalize(p, res.x.head(d), 0.0, &res.reduced, it, nrows,
                                      "cutting_plane"));
    u.gamma = res.x.head(d);
    u.zeta = res.x[d];
    const GEval e = evaluate_g(p, u);
    const double viol = e.g - cap;
    const double gap = coc ? p.spec.capital_cost * (e.g - res.x[nv - 1]) : 0.0;
    if (viol <= feas_tol && gap <= tol * (1.0 + std::abs(res.objective))) {
      double lambda = 0.0;
      for (Eigen::Index r = 0; r < nrows; ++r)
        if (is_budget_cut[std::size_t(r)]) lambda += std::max(0.0, -res.y[r]);
      return finalize(p, u.gamma, lambda, &res.reduced, it, nrows, "cutting_plane");
    }
    if (viol <= 1e-6 * std::max(1.0, std::abs(cap))) {
      const double obj = -p.scen.column_means.dot(u.gamma) +
                         (coc ? p.spec.capital_cost * e.g : 0.0);
      if (obj < best_obj) {
        best_obj = obj;
        best_gamma = u.gamma;
        have_best = true;
      }
    }
    add_cuts(u, e);
  }
  throw ConvergenceError(
      "no convergence within cut budget",
      finalize(p, have_best ? best_gamma : Eigen::VectorXd(u.gamma), 0.0,
               res.x.size() ? &res.reduced : nullptr, it, nrows, "cutting_plane"));
}

Solution solve_epigraph_lp(const SaaProblem& p) {
  const Eigen::Index n = p.n(), d = p.dim();
  if (n > 20000) throw std::invalid_argument("epigraph solver limited to n <= 20000");
  const bool coc = p.spec.loss == LossKind::cost_of_capital;
  const double q = 1.0 / (double(n) * (1.0 - p.spec.alpha.alpha));
  const Eigen::Index nv = d + 1 + n;

  lp::Lp e;
  e.A = Eigen::MatrixXd::Zero(n + 1, nv);
  e.A.topLeftCorner(n, d) = p.scen.data;
  e.A.block(0, d, n, 1).setOnes();
  e.A.block(0, d + 1, n, n).setIdentity();  // X_j'gamma + zeta + t_j >= 0
  e.A(n, d) = 1.0;
  e.A.row(n).tail(n).setConstant(q);  // zeta + q sum t_j <= K
  e.c = Eigen::VectorXd::Zero(nv);
  e.c.head(d) = -p.scen.column_means;
  if (coc) {
    e.c[d] += p.spec.capital_cost;
    e.c.tail(n).array() += p.spec.capital_cost * q;
  }
  e.xlo = Eigen::VectorXd::Constant(nv, 0.0);
  e.xlo.head(d) = p.spec.gamma_low;
  e.xlo[d] = p.zeta_low;
  e.xup = Eigen::VectorXd::Constant(nv, lp::kInf);
  e.xup.head(d) = p.spec.gamma_up;
  e.xup[d] = p.zeta_up;
  e.rlo = Eigen::VectorXd::Zero(n + 1);
  e.rlo[n] = -lp::kInf;
  e.rup = Eigen::VectorXd::Constant(n + 1, lp::kInf);
  e.rup[n] = p.spec.capital;

  const lp::Result res = lp::solve(e);
  if (res.status == lp::Status::infeasible) throw InfeasibleError("empty feasible set");
  if (res.status != lp::Status::optimal)
    throw ConvergenceError("epigraph LP stalled",
                           finalize(p, res.x.head(d), 0.0, nullptr, res.iterations, 0,
                                    "epigraph_lp"));
  const double lambda = std::max(0.0, -res.y[n]);
  return finalize(p, res.x.head(d), lambda, &res.reduced, res.iterations, 0,
                  "epigraph_lp");
}

Solution solve_direct_grid(const SaaProblem& p, Eigen::Index points_per_dim) {
  const Eigen::Index d = p.dim();
  if (d > 3) throw std::invalid_argument("grid solver limited to d <= 3");
  if (points_per_dim < 2) throw std::invalid_argument("grid needs at least 2 points per axis");
  const double feas_tol = 1e-9 * std::max(1.0, std::abs(p.spec.capital));

  std::vector<std::vector<double>> axes(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    const double lo = p.spec.gamma_low[i], up = p.spec.gamma_up[i];
    auto& ax = axes[std::size_t(i)];
    if (up == lo) {
      ax.push_back(lo);
      continue;
    }
    for (Eigen::Index k = 0; k < points_per_dim; ++k)
      ax.push_back(lo + (up - lo) * double(k) / double(points_per_dim - 1));
  }

  long visited = 0;
  bool found = false;
  double best_obj = lp::kInf;
  Eigen::VectorXd best_gamma;
  Eigen::VectorXd gamma(d);
  std::vector<std::size_t> idx(std::size_t(d), 0);
  for (;;) {
    for (Eigen::Index i = 0; i < d; ++i) gamma[i] = axes[std::size_t(i)][idx[std::size_t(i)]];
    ++visited;
    const Eigen::ArrayXd losses = portfolio_losses(p.scen, gamma);
    const double g = empirical_cvar(losses.matrix(), p.spec.alpha);
    if (g <= p.spec.capital + feas_tol) {
      const double obj = -p.scen.column_means.dot(gamma) +
                         (p.spec.loss == LossKind::cost_of_capital
                              ? p.spec.capital_cost * g
                              : 0.0);
      if (!found || obj < best_obj) {
        found = true;
        best_obj = obj;
        best_gamma = gamma;
      }
    }
    Eigen::Index i = 0;
    while (i < d && ++idx[std::size_t(i)] == axes[std::size_t(i)].size()) {
      idx[std::size_t(i)] = 0;
      ++i;
    }
    if (i == d) break;
  }
  if (!found) throw InfeasibleError("all grid points infeasible");

  const double zeta =
      empirical_var(portfolio_losses(p.scen, best_gamma).matrix(), p.spec.alpha);
  const double lambda = formula_lambda(p, best_gamma, zeta).value_or(0.0);
  return finalize(p, best_gamma, std::max(0.0, lambda), nullptr, visited, 0, "grid");
}

MultiplierReport extract_multiplier(const SaaProblem& p, const Solution& sol) {
  MultiplierReport r;
  r.lambda_dual = sol.lambda;
  Eigen::Index coord = -1;
  r.lambda_formula = formula_lambda(p, sol.gamma, sol.zeta, &coord);
  r.crosscheck_available = r.lambda_formula.has_value();
  if (r.crosscheck_available)
    r.note = "stationarity cross-check at coordinate " + std::to_string(coord);
  else
    r.note = "formula cross-check unavailable";
  return r;
}

}  // namespace cvarsaa
