#pragma once
// Dense bounded-variable revised simplex for the small/medium LPs this
// library produces (cutting-plane masters, scenario epigraph LPs).
//
// Solves   min c'x   s.t.   rlo <= A x <= rup,   xlo <= x <= xup,
// with any bound allowed to be +-infinity and equality expressed as
// rlo == rup.  Two-phase: composite phase 1 on the slack basis, then
// Dantzig pricing with a Bland fallback after a stall.  The basis inverse
// is kept dense with product-form updates and periodic refactorization.
//
// Dual convention: on an optimal basis c_j = A_j' y for basic structural
// columns, so a binding "<=" row has y <= 0 and its Lagrange multiplier in
// the usual sign convention is -y; a binding ">=" row has y >= 0.

#include <Eigen/Dense>

#include <limits>

namespace cvarsaa::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Lp {
  Eigen::MatrixXd A;       // m x n
  Eigen::VectorXd c;       // n
  Eigen::VectorXd xlo, xup;  // n, entries may be +-kInf
  Eigen::VectorXd rlo, rup;  // m, bounds on the row activities A x
  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }
};

struct Result {
  Status status = Status::iteration_limit;
  Eigen::VectorXd x;        // n
  Eigen::VectorXd y;        // m row duals
  Eigen::VectorXd reduced;  // n structural reduced costs c - A'y
  double objective = 0.0;
  long iterations = 0;
};

// max_iter == 0 picks a budget from the problem size.
Result solve(const Lp& lp, double feas_tol = 1e-9, long max_iter = 0);

}  // namespace cvarsaa::lp
