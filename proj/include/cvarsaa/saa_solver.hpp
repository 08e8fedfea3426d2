#pragma once
// Sample-average CVaR-constrained portfolio allocation:
//
//   max  mean return        min  -xbar' gamma            (linear loss)
//   s.t. g_N(gamma, zeta) <= K,  gamma in [gamma_low, gamma_up],
//
// or with a cost-of-capital objective  min -xbar' gamma + c * g_N(gamma,zeta)
// still subject to the same CVaR budget.  Three interchangeable solvers:
// Kelley cutting planes on a dense master LP, the exact scenario epigraph
// LP, and a brute-force grid for cross-checking in low dimension.

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>

#include "cvarsaa/market_models.hpp"
#include "cvarsaa/risk_measures.hpp"

namespace cvarsaa {

enum class LossKind { linear, cost_of_capital };

struct ProblemSpec {
  TailLevel alpha{0.99};
  double capital = 100.0;  // CVaR budget K
  Eigen::VectorXd gamma_low, gamma_up;
  std::optional<double> zeta_low, zeta_up;  // optional override of auto bounds
  LossKind loss = LossKind::linear;
  double capital_cost = 0.0;  // c in (0,1), cost_of_capital only

  Eigen::Index dim() const { return gamma_low.size(); }
  void validate() const;
};

struct SaaProblem {
  ProblemSpec spec;
  ScenarioMatrix scen;
  double zeta_low = 0.0, zeta_up = 0.0;
  bool small_tail = false;  // fewer than ~10 scenarios inside the tail

  Eigen::Index n() const { return scen.n(); }
  Eigen::Index dim() const { return spec.dim(); }
};

struct Solution {
  Eigen::VectorXd gamma;
  double zeta = 0.0;
  double value = 0.0;   // objective at the reported point
  double lambda = 0.0;  // multiplier of the CVaR budget
  Eigen::VectorXd bound_dual_low, bound_dual_up;
  bool active_constraint = false;
  long iterations = 0;
  long cuts = 0;
  double constraint_residual = 0.0;  // g_N(gamma, zeta) - K
  double compl_slack = 0.0;          // |lambda * (g_N - K)|
  bool small_tail = false;
  std::string solver;
};

class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, Solution best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const Solution& best() const { return best_; }

 private:
  Solution best_;
};

// Validates, derives exact zeta bounds from the box and the scenarios
// (vertex-wise loss range), and flags thin tails.
SaaProblem assemble_problem(ProblemSpec spec, ScenarioMatrix scen);

Solution solve_cutting_plane(const SaaProblem& p, double tol = 1e-8,
                             long max_cuts = 500);

// One LP over (gamma, zeta, t_1..t_N); exact for the SAA problem.
Solution solve_epigraph_lp(const SaaProblem& p);

// Exhaustive box grid, d <= 3; points_per_dim per axis.
Solution solve_direct_grid(const SaaProblem& p, Eigen::Index points_per_dim = 21);

struct MultiplierReport {
  double lambda_dual = 0.0;
  std::optional<double> lambda_formula;
  bool crosscheck_available = false;
  std::string note;
};

// Cross-checks the LP multiplier against the stationarity identity
// xbar_j = lambda * dg/dgamma_j at a strictly interior coordinate.
MultiplierReport extract_multiplier(const SaaProblem& p, const Solution& sol);

}  // namespace cvarsaa
