#include "cvarsaa/simplex.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cvarsaa::lp {
namespace {

enum VStat : std::int8_t { kAtLower, kAtUpper, kFreeNb, kBasic };

constexpr double kPivotTol = 1e-11;   // |w_k| below this never blocks/pivots
constexpr double kRatioTie = 1e-12;
constexpr long kStallLimit = 200;     // non-improving pivots before Bland
constexpr long kRefactorEvery = 100;

struct Solver {
  const Lp& lp;
  Eigen::Index m, n, ncols;
  double feas_tol, dual_tol;
  long budget;

  // Augmented system [A | -I] z = 0 with z = [x; s]; s carries the row
  // activity and inherits [rlo, rup] as its variable bounds.
  Eigen::VectorXd lo, up, z;
  std::vector<Eigen::Index> basic;  // row -> augmented column
  std::vector<std::int8_t> stat;    // augmented column -> VStat
  Eigen::MatrixXd binv;

  long pivots = 0;
  long since_refactor = 0;
  long stall = 0;
  bool bland = false;
  double last_measure = kInf;

  Solver(const Lp& p, double ftol, long max_iter)
      : lp(p), m(p.rows()), n(p.cols()), ncols(m + n), feas_tol(ftol) {
    dual_tol = 1e-9 * (1.0 + (n ? lp.c.cwiseAbs().maxCoeff() : 0.0));
    budget = max_iter > 0 ? max_iter : std::max<long>(20000, 50 * long(ncols));

    lo.resize(ncols);
    up.resize(ncols);
    lo.head(n) = lp.xlo;
    up.head(n) = lp.xup;
    lo.tail(m) = lp.rlo;
    up.tail(m) = lp.rup;

    z.setZero(ncols);
    stat.assign(std::size_t(ncols), kFreeNb);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isfinite(lo[j]) && (!std::isfinite(up[j]) || std::abs(lo[j]) <= std::abs(up[j]))) {
        stat[std::size_t(j)] = kAtLower;
        z[j] = lo[j];
      } else if (std::isfinite(up[j])) {
        stat[std::size_t(j)] = kAtUpper;
        z[j] = up[j];
      }
    }
    basic.resize(std::size_t(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      basic[std::size_t(i)] = n + i;
      stat[std::size_t(n + i)] = kBasic;
    }
    binv = -Eigen::MatrixXd::Identity(m, m);  // slack basis B = -I
    recompute_basic_values();
  }

  Eigen::VectorXd column(Eigen::Index j) const {
    if (j < n) return lp.A.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e[j - n] = -1.0;
    return e;
  }

  Eigen::VectorXd ftran(Eigen::Index j) const {
    if (j < n) return binv * lp.A.col(j);
    return -binv.col(j - n);
  }

  void recompute_basic_values() {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (Eigen::Index j = 0; j < n; ++j)
      if (stat[std::size_t(j)] != kBasic) x[j] = z[j];
    rhs.noalias() = -(lp.A * x);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index s = n + i;
      if (stat[std::size_t(s)] != kBasic) rhs[i] += z[s];  // -(-1)*z_s
    }
    const Eigen::VectorXd xb = binv * rhs;
    for (Eigen::Index k = 0; k < m; ++k) z[basic[std::size_t(k)]] = xb[k];
  }

  void refactor() {
    Eigen::MatrixXd b(m, m);
    for (Eigen::Index k = 0; k < m; ++k) b.col(k) = column(basic[std::size_t(k)]);
    binv = b.partialPivLu().inverse();
    recompute_basic_values();
    since_refactor = 0;
  }

  double phase1_cost(Eigen::Index col) const {
    const double v = z[col];
    if (v < lo[col] - feas_tol) return -1.0;
    if (v > up[col] + feas_tol) return 1.0;
    return 0.0;
  }

  double infeasibility() const {
    double s = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      const Eigen::Index j = basic[std::size_t(k)];
      s += std::max(0.0, lo[j] - z[j]) + std::max(0.0, z[j] - up[j]);
    }
    return s;
  }

  // Reduced costs of all nonbasic columns for the given basic-cost vector.
  // Structural: cost_j - A_j' y ; slack i: slack_cost - (-e_i)' y.
  void price(const Eigen::VectorXd& cb, bool phase2, Eigen::VectorXd& red) const {
    const Eigen::VectorXd y = binv.transpose() * cb;
    red.resize(ncols);
    red.head(n) = -(lp.A.transpose() * y);
    if (phase2) red.head(n) += lp.c;
    red.tail(m) = y;
  }

  struct Entering {
    Eigen::Index col = -1;
    int sigma = 0;
  };

  Entering choose_entering(const Eigen::VectorXd& red) const {
    Entering best;
    double best_score = dual_tol;
    for (Eigen::Index j = 0; j < ncols; ++j) {
      const auto st = stat[std::size_t(j)];
      if (st == kBasic) continue;
      if (up[j] - lo[j] <= 0.0) continue;  // fixed column
      const double r = red[j];
      double score = 0.0;
      int sigma = 0;
      if (st == kAtLower && r < -dual_tol) {
        score = -r;
        sigma = 1;
      } else if (st == kAtUpper && r > dual_tol) {
        score = r;
        sigma = -1;
      } else if (st == kFreeNb && std::abs(r) > dual_tol) {
        score = std::abs(r);
        sigma = r < 0.0 ? 1 : -1;
      } else {
        continue;
      }
      if (bland) return {j, sigma};  // smallest eligible index
      if (score > best_score) {
        best_score = score;
        best = {j, sigma};
      }
    }
    return best;
  }

  struct Ratio {
    double t = kInf;
    Eigen::Index row = -1;   // -1: entering hits its own bound (flip)
    double bound = 0.0;      // bound the leaving variable lands on
    bool to_upper = false;
  };

  // Step length until the first basic variable hits a bound that changes
  // its (phase-1) cost status, or the entering column spans its own box.
  Ratio ratio_test(Eigen::Index enter, int sigma, const Eigen::VectorXd& w,
                   bool phase2) const {
    Ratio best;
    best.t = up[enter] - lo[enter];  // bound flip distance (may be inf)
    for (Eigen::Index k = 0; k < m; ++k) {
      const double dir = -sigma * w[k];
      if (std::abs(dir) <= kPivotTol) continue;
      const Eigen::Index j = basic[std::size_t(k)];
      const double v = z[j];
      double target;
      bool to_upper;
      if (dir > 0.0) {
        if (!phase2 && v < lo[j] - feas_tol) {
          target = lo[j];  // infeasible-below variable rising to feasibility
          to_upper = false;
        } else if (std::isfinite(up[j]) && v <= up[j] + feas_tol) {
          target = up[j];
          to_upper = true;
        } else {
          continue;
        }
      } else {
        if (!phase2 && v > up[j] + feas_tol) {
          target = up[j];
          to_upper = true;
        } else if (std::isfinite(lo[j]) && v >= lo[j] - feas_tol) {
          target = lo[j];
          to_upper = false;
        } else {
          continue;
        }
      }
      double t = (target - v) / dir;
      if (t < 0.0) t = 0.0;  // degenerate: already at (or past) the bound
      const bool tie = t < best.t + kRatioTie && t > best.t - kRatioTie;
      bool take = t < best.t - kRatioTie;
      if (!take && tie) {
        // lexicographic smallest-index pivot on ties (reproducible bases);
        // a real pivot beats an equal-length bound flip
        take = best.row < 0 || j < basic[std::size_t(best.row)];
      }
      if (take) best = {t, k, target, to_upper};
    }
    return best;
  }

  void apply_flip(Eigen::Index enter, int sigma, const Eigen::VectorXd& w) {
    const double span = up[enter] - lo[enter];
    for (Eigen::Index k = 0; k < m; ++k) z[basic[std::size_t(k)]] -= sigma * span * w[k];
    stat[std::size_t(enter)] = sigma > 0 ? kAtUpper : kAtLower;
    z[enter] = sigma > 0 ? up[enter] : lo[enter];
  }

  void apply_pivot(Eigen::Index enter, int sigma, const Eigen::VectorXd& w,
                   const Ratio& r) {
    for (Eigen::Index k = 0; k < m; ++k) z[basic[std::size_t(k)]] -= sigma * r.t * w[k];
    z[enter] += sigma * r.t;
    const Eigen::Index leave = basic[std::size_t(r.row)];
    stat[std::size_t(leave)] = r.to_upper ? kAtUpper : kAtLower;
    z[leave] = r.bound;
    basic[std::size_t(r.row)] = enter;
    stat[std::size_t(enter)] = kBasic;

    const double piv = w[r.row];
    binv.row(r.row) /= piv;
    Eigen::VectorXd wz = w;
    wz[r.row] = 0.0;
    binv.noalias() -= wz * binv.row(r.row);
    if (++since_refactor >= kRefactorEvery) refactor();
  }

  void note_progress(double measure) {
    if (measure < last_measure - 1e-13 * (1.0 + std::abs(last_measure)))
      stall = 0;
    else if (++stall > kStallLimit)
      bland = true;
    last_measure = measure;
  }

  // Returns the phase outcome; phase 1 "optimal" means feasible reached.
  Status run_phase(bool phase2) {
    Eigen::VectorXd cb(m), red;
    last_measure = kInf;
    stall = 0;
    while (pivots < budget) {
      if (!phase2) {
        bool any = false;
        for (Eigen::Index k = 0; k < m; ++k) {
          cb[k] = phase1_cost(basic[std::size_t(k)]);
          any = any || cb[k] != 0.0;
        }
        if (!any) return Status::optimal;
        note_progress(infeasibility());
      } else {
        for (Eigen::Index k = 0; k < m; ++k) {
          const Eigen::Index j = basic[std::size_t(k)];
          cb[k] = j < n ? lp.c[j] : 0.0;
        }
        double obj = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) obj += lp.c[j] * z[j];
        note_progress(obj);
      }
      price(cb, phase2, red);
      const Entering e = choose_entering(red);
      if (e.col < 0) {
        if (phase2) return Status::optimal;
        return infeasibility() <= feas_tol * double(m) ? Status::optimal
                                                       : Status::infeasible;
      }
      const Eigen::VectorXd w = ftran(e.col);
      const Ratio r = ratio_test(e.col, e.sigma, w, phase2);
      ++pivots;
      if (r.row < 0) {
        if (!std::isfinite(r.t)) {
          if (phase2) return Status::unbounded;
          throw std::runtime_error("simplex: unblocked phase-1 direction");
        }
        apply_flip(e.col, e.sigma, w);
      } else {
        apply_pivot(e.col, e.sigma, w, r);
      }
    }
    return Status::iteration_limit;
  }

  Result finish(Status status) {
    Result out;
    out.status = status;
    out.iterations = pivots;
    if (status == Status::optimal) refactor();  // clean values for reporting
    out.x = z.head(n);
    out.objective = n ? lp.c.dot(out.x) : 0.0;
    out.y = Eigen::VectorXd::Zero(m);
    out.reduced = Eigen::VectorXd::Zero(n);
    if (status == Status::optimal) {
      Eigen::VectorXd cb(m);
      for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index j = basic[std::size_t(k)];
        cb[k] = j < n ? lp.c[j] : 0.0;
      }
      out.y = binv.transpose() * cb;
      out.reduced = lp.c - lp.A.transpose() * out.y;
    }
    return out;
  }
};

}  // namespace

Result solve(const Lp& lp, double feas_tol, long max_iter) {
  if (lp.A.rows() != lp.rlo.size() || lp.A.rows() != lp.rup.size() ||
      lp.A.cols() != lp.c.size() || lp.A.cols() != lp.xlo.size() ||
      lp.A.cols() != lp.xup.size())
    throw std::invalid_argument("lp dimensions disagree");
  for (Eigen::Index j = 0; j < lp.cols(); ++j)
    if (lp.xlo[j] > lp.xup[j]) throw std::invalid_argument("lp: crossed column bounds");
  for (Eigen::Index i = 0; i < lp.rows(); ++i)
    if (lp.rlo[i] > lp.rup[i]) throw std::invalid_argument("lp: crossed row bounds");

  Solver s(lp, feas_tol, max_iter);
  Status st = s.run_phase(false);
  if (st == Status::optimal) st = s.run_phase(true);
  return s.finish(st);
}

}  // namespace cvarsaa::lp
