#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "cvarsaa/simplex.hpp"

using namespace cvarsaa;

namespace {

// Ax and bound feasibility, stationarity, and complementary slackness for a
// claimed-optimal result.  Sign convention: reduced = c - A'y; a variable at
// its lower bound needs reduced >= 0, at its upper bound reduced <= 0; a row
// binding at rup (a "<=" row) carries y <= 0, binding at rlo carries y >= 0.
void check_kkt(const lp::Lp& p, const lp::Result& r, double tol = 1e-7) {
  const Eigen::Index n = p.c.size(), m = p.A.rows();
  REQUIRE(r.x.size() == n);
  REQUIRE(r.y.size() == m);
  const Eigen::VectorXd row = p.A * r.x;
  for (Eigen::Index j = 0; j < n; ++j) {
    CHECK(r.x[j] >= p.xlo[j] - tol);
    CHECK(r.x[j] <= p.xup[j] + tol);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    CHECK(row[i] >= p.rlo[i] - tol);
    CHECK(row[i] <= p.rup[i] + tol);
  }
  const Eigen::VectorXd red = p.c - p.A.transpose() * r.y;
  CHECK((red - r.reduced).lpNorm<Eigen::Infinity>() < tol);
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool at_lo = r.x[j] <= p.xlo[j] + tol;
    const bool at_up = r.x[j] >= p.xup[j] - tol;
    if (!at_lo) CHECK(red[j] <= tol);   // can decrease x_j without gain
    if (!at_up) CHECK(red[j] >= -tol);  // can increase x_j without gain
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool at_lo = row[i] <= p.rlo[i] + tol;
    const bool at_up = row[i] >= p.rup[i] - tol;
    if (!at_lo) CHECK(r.y[i] <= tol);
    if (!at_up) CHECK(r.y[i] >= -tol);
  }
  CHECK(r.objective == doctest::Approx(p.c.dot(r.x)).epsilon(1e-9).scale(1.0));
}

lp::Lp make_lp(Eigen::MatrixXd A, Eigen::VectorXd c) {
  lp::Lp p;
  p.A = std::move(A);
  p.c = std::move(c);
  p.xlo = Eigen::VectorXd::Zero(p.c.size());
  p.xup = Eigen::VectorXd::Constant(p.c.size(), lp::kInf);
  p.rlo = Eigen::VectorXd::Constant(p.A.rows(), -lp::kInf);
  p.rup = Eigen::VectorXd::Constant(p.A.rows(), lp::kInf);
  return p;
}

// Deterministic instance generator, mirrored by the offline reference run
// that produced kLpBatch below.
struct XorShift {
  std::uint64_t s;
  explicit XorShift(std::uint64_t k)
      : s(0x0123456789ABCDEFull ^ (k * 0x9E3779B97F4A7C15ull)) {}
  std::uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
};

lp::Lp random_instance(std::uint64_t k) {
  XorShift r(k);
  const Eigen::Index m = Eigen::Index(3 + r.next() % 4);
  const Eigen::Index n = Eigen::Index(4 + r.next() % 5);
  lp::Lp p;
  p.A.resize(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      p.A(i, j) = (double(r.next() % 41) - 20.0) / 4.0;
  p.c.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) p.c[j] = (double(r.next() % 17) - 8.0) / 4.0;
  p.xlo = Eigen::VectorXd::Zero(n);
  p.xup.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) p.xup[j] = double(r.next() % 33) / 4.0;
  p.rlo = Eigen::VectorXd::Constant(m, -lp::kInf);
  p.rup.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) p.rup[i] = (double(r.next() % 49) - 8.0) / 4.0;
  return p;
}

// Status + objective frozen from an independent solver run on the same
// generator (see the generator comment; objectives to full precision).
struct LpOracle {
  std::uint64_t k;
  bool optimal;
  double objective;
};
constexpr LpOracle kLpBatch[] = {
    {1, true, -10.285714285714286},
    {2, true, 0.0},
    {3, false, 0.0},
    {4, true, -39.75},
    {5, true, -0.25},
    {6, true, -1.8125},
    {7, true, -6.3984375},
    {8, true, -2.1770833333333335},
    {9, true, -11.00561797752809},
    {10, true, -24.124747002383931},
    {11, true, -3.160714285714286},
    {12, true, -3.3253504672897196},
    {13, true, -0.33522727272727271},
    {14, true, -13.179166666666667},
    {15, true, -5.7857142857142856},
    {16, false, 0.0},
    {17, true, -1.390625},
    {18, true, -4.759615384615385},
    {19, true, 0.0},
    {20, true, -3.371452223273415},
};

}  // namespace

TEST_CASE("one capacity row shared by two goods") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd c(2);
  c << -1, -1;
  lp::Lp p = make_lp(A, c);
  p.xup = Eigen::VectorXd::Constant(2, 10.0);
  p.rup[0] = 1.0;
  const lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(r.y[0] == doctest::Approx(-1.0).epsilon(1e-9));  // binding <= row: y <= 0
  check_kkt(p, r);
}

TEST_CASE("equality row via rlo == rup") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd c(2);
  c << 1, 2;
  lp::Lp p = make_lp(A, c);
  p.rlo[0] = 1.0;
  p.rup[0] = 1.0;
  const lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.x[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  check_kkt(p, r);
}

TEST_CASE("infeasible row is certified") {
  Eigen::MatrixXd A(1, 1);
  A << 1;
  Eigen::VectorXd c(1);
  c << 0;
  lp::Lp p = make_lp(A, c);
  p.xup[0] = 10.0;
  p.rup[0] = -1.0;  // x <= -1 against x >= 0
  CHECK(lp::solve(p).status == lp::Status::infeasible);
}

TEST_CASE("unbounded descent is certified") {
  Eigen::MatrixXd A(1, 1);
  A << 1;
  Eigen::VectorXd c(1);
  c << -1;
  lp::Lp p = make_lp(A, c);
  p.rlo[0] = 0.0;  // x >= 0 again; no upper bound anywhere
  CHECK(lp::solve(p).status == lp::Status::unbounded);
}

TEST_CASE("free variable settles on a row bound") {
  Eigen::MatrixXd A(1, 1);
  A << 1;
  Eigen::VectorXd c(1);
  c << 1;
  lp::Lp p = make_lp(A, c);
  p.xlo[0] = -lp::kInf;
  p.rlo[0] = -5.0;
  const lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(-5.0).epsilon(1e-10));
  CHECK(r.y[0] == doctest::Approx(1.0).epsilon(1e-9));  // binding >= row: y >= 0
  check_kkt(p, r);
}

TEST_CASE("degenerate vertex with a redundant row") {
  Eigen::MatrixXd A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  Eigen::VectorXd c(2);
  c << -1, -1;
  lp::Lp p = make_lp(A, c);
  p.xup = Eigen::VectorXd::Constant(2, 5.0);
  p.rup << 1.0, 1.0, 2.0;
  const lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(-2.0).epsilon(1e-10));
  check_kkt(p, r);
}

TEST_CASE("entering variable can hit its own bound (flip step)") {
  Eigen::MatrixXd A(1, 1);
  A << 0;
  Eigen::VectorXd c(1);
  c << -1;
  lp::Lp p = make_lp(A, c);
  p.xup[0] = 3.0;
  p.rup[0] = 1.0;
  const lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(r.objective == doctest::Approx(-3.0).epsilon(1e-12));
  check_kkt(p, r);
}

TEST_CASE("ranged row binds on either side") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd cmin(2), cmax(2);
  cmin << 1, 1;
  cmax << -1, -1;
  lp::Lp p = make_lp(A, cmin);
  p.xup = Eigen::VectorXd::Constant(2, 5.0);
  p.rlo[0] = 1.0;
  p.rup[0] = 2.0;
  lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-10));
  check_kkt(p, r);
  p.c = cmax;
  r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(-2.0).epsilon(1e-10));
  check_kkt(p, r);
}

TEST_CASE("negative bounds and a binding >= row") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd c(2);
  c << 1, 1;
  lp::Lp p = make_lp(A, c);
  p.xlo = Eigen::VectorXd::Constant(2, -2.0);
  p.xup = Eigen::VectorXd::Constant(2, 2.0);
  p.rlo[0] = -3.0;
  const lp::Result r = lp::solve(p);
  REQUIRE(r.status == lp::Status::optimal);
  CHECK(r.objective == doctest::Approx(-3.0).epsilon(1e-10));
  check_kkt(p, r);
}

TEST_CASE("input validation") {
  Eigen::MatrixXd A(1, 2);
  A << 1, 1;
  Eigen::VectorXd c(2);
  c << 1, 1;
  lp::Lp p = make_lp(A, c);
  p.xlo[0] = 2.0;
  p.xup[0] = 1.0;
  CHECK_THROWS_AS(lp::solve(p), std::invalid_argument);
  p = make_lp(A, c);
  p.rlo[0] = 3.0;
  p.rup[0] = 2.0;
  CHECK_THROWS_AS(lp::solve(p), std::invalid_argument);
  p = make_lp(A, Eigen::VectorXd::Ones(3));
  CHECK_THROWS_AS(lp::solve(p), std::invalid_argument);
}

TEST_CASE("frozen batch of 20 generated instances matches the reference") {
  for (const LpOracle& o : kLpBatch) {
    CAPTURE(o.k);
    const lp::Lp p = random_instance(o.k);
    const lp::Result r = lp::solve(p);
    if (!o.optimal) {
      CHECK(r.status == lp::Status::infeasible);
      continue;
    }
    REQUIRE(r.status == lp::Status::optimal);
    CHECK(r.objective ==
          doctest::Approx(o.objective).epsilon(1e-7).scale(1.0));
    check_kkt(p, r);
  }
}
