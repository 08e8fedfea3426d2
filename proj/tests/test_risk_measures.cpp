#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "cvarsaa/rng.hpp"
#include "cvarsaa/risk_measures.hpp"
#include "test_helpers.hpp"

using namespace cvarsaa;

namespace {

Eigen::VectorXd iota(int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = i + 1;
  return v;
}

Eigen::MatrixXd column(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(Eigen::Index(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return m;
}

}  // namespace

TEST_CASE("tail level domain") {
  CHECK_THROWS_AS(TailLevel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(TailLevel(1.0), std::invalid_argument);
  CHECK(TailLevel(0.5).alpha == 0.5);
}

TEST_CASE("empirical VaR: order statistic with a left-endpoint convention") {
  CHECK(empirical_var(iota(100), TailLevel(0.95)) == 95.0);
  CHECK(empirical_var(iota(4), TailLevel(0.5)) == 2.0);
  Eigen::VectorXd c = Eigen::VectorXd::Constant(17, 3.25);
  CHECK(empirical_var(c, TailLevel(0.9)) == 3.25);
  // permutation invariant
  Eigen::VectorXd shuffled(5);
  shuffled << 9, 1, 7, 3, 5;
  CHECK(empirical_var(shuffled, TailLevel(0.6)) == 5.0);
  CHECK_THROWS_WITH_AS(empirical_var(Eigen::VectorXd(), TailLevel(0.9)),
                       "empirical_var: empty loss vector", std::invalid_argument);
}

TEST_CASE("empirical CVaR: tail mean beyond VaR") {
  // 95 + (1/5)(1+2+3+4+5)
  CHECK(empirical_cvar(iota(100), TailLevel(0.95)) == doctest::Approx(98.0).epsilon(1e-14));
  Eigen::VectorXd c = Eigen::VectorXd::Constant(9, -2.0);
  CHECK(empirical_cvar(c, TailLevel(0.5)) == -2.0);
  rng::Stream s(17, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd x(200);
    for (int i = 0; i < 200; ++i) x[i] = s.normal() * 3.0 + 0.5;
    const double var = empirical_var(x, TailLevel(0.9));
    const double cvar = empirical_cvar(x, TailLevel(0.9));
    CHECK(cvar >= var - 1e-12);
  }
  CHECK_THROWS_WITH_AS(empirical_cvar(Eigen::VectorXd(), TailLevel(0.9)),
                       "empirical_cvar: empty loss vector", std::invalid_argument);
}

TEST_CASE("empirical CVaR: positive homogeneity and translation, exact") {
  Eigen::VectorXd x(8);
  x << -3, 7, 1, -10, 4, 12, 0, 5;  // exactly representable
  const TailLevel a(0.75);
  const double base = empirical_cvar(x, a);
  // powers of two scale without rounding
  CHECK(empirical_cvar((4.0 * x).eval(), a) == 4.0 * base);
  CHECK(empirical_cvar((0.5 * x).eval(), a) == 0.5 * base);
  // integer shifts of integer data are exact
  CHECK(empirical_cvar((x.array() + 9.0).matrix().eval(), a) == base + 9.0);
  CHECK(empirical_var((x.array() + 9.0).matrix().eval(), a) ==
        empirical_var(x, a) + 9.0);
  // general scale/shift to roundoff
  rng::Stream s(5, 3);
  Eigen::VectorXd y(100);
  for (int i = 0; i < 100; ++i) y[i] = s.normal();
  CHECK(empirical_cvar((2.7 * y).eval(), a) ==
        doctest::Approx(2.7 * empirical_cvar(y, a)).epsilon(1e-13));
  CHECK(empirical_cvar((y.array() - 1.3).matrix().eval(), a) ==
        doctest::Approx(empirical_cvar(y, a) - 1.3).epsilon(1e-13));
}

TEST_CASE("g_emp: hand value, floor in zeta, and minimum at the VaR") {
  const Eigen::MatrixXd scen = column({1, 2, 3, 4});
  const TailLevel a(0.5);
  AuxiliaryPoint u;
  u.gamma = Eigen::VectorXd::Ones(1);
  u.zeta = -3.0;
  CHECK(g_emp(u, scen, a) == doctest::Approx(-1.5).epsilon(1e-15));

  // zeta at or above the largest loss: all hinges vanish, g = zeta
  u.zeta = 0.5;  // losses are {-1,-2,-3,-4}
  CHECK(g_emp(u, scen, a) == 0.5);

  // min over a fine zeta grid equals the empirical CVaR of the losses
  const Eigen::VectorXd losses = -scen.col(0);
  const double cvar = empirical_cvar(losses, a);
  double best = 1e300;
  for (double z = -5.0; z <= 1.0; z += 1e-3) {
    u.zeta = z;
    best = std::min(best, g_emp(u, scen, a));
  }
  CHECK(best == doctest::Approx(cvar).epsilon(1e-6));
  CHECK(best >= cvar - 1e-12);  // grid can only overshoot the true min

  AuxiliaryPoint bad{Eigen::VectorXd::Ones(2), 0.0};
  CHECK_THROWS_WITH_AS(g_emp(bad, scen, a),
                       "g_emp: scenario/portfolio dimension mismatch",
                       std::invalid_argument);
}

TEST_CASE("g_subgradient: hand values and the all-slack regime") {
  const Eigen::MatrixXd scen = column({1, 2, 3, 4});
  const TailLevel a(0.5);
  AuxiliaryPoint u{Eigen::VectorXd::Ones(1), -3.0};
  Eigen::VectorXd sub = g_subgradient(u, scen, a);
  REQUIRE(sub.size() == 2);
  CHECK(sub[0] == doctest::Approx(-1.5).epsilon(1e-15));  // d/dgamma
  CHECK(sub[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));  // d/dzeta

  u.zeta = 2.0;  // above every loss: no active scenarios
  sub = g_subgradient(u, scen, a);
  CHECK(sub[0] == 0.0);
  CHECK(sub[1] == 1.0);
}

TEST_CASE("g_subgradient matches finite differences away from kinks") {
  rng::Stream s(23, 0);
  const int d = 4, n = 60;
  Eigen::MatrixXd scen(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) scen(i, j) = s.normal() + 1.0;
  const TailLevel a(0.8);
  const double h = 1e-6;
  int checked = 0;
  for (int rep = 0; rep < 12; ++rep) {
    AuxiliaryPoint u;
    u.gamma = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return s.uniform() * 3.0; });
    u.zeta = -u.gamma.sum() + s.normal();
    // skip points too close to a kink for a two-sided difference
    const Eigen::ArrayXd losses = -(scen * u.gamma).array();
    if ((losses - u.zeta).abs().minCoeff() < 50 * h) continue;
    const Eigen::VectorXd sub = g_subgradient(u, scen, a);
    for (int j = 0; j <= d; ++j) {
      AuxiliaryPoint up = u, dn = u;
      if (j < d) {
        up.gamma[j] += h;
        dn.gamma[j] -= h;
      } else {
        up.zeta += h;
        dn.zeta -= h;
      }
      const double fd = (g_emp(up, scen, a) - g_emp(dn, scen, a)) / (2 * h);
      CHECK(sub[j] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
    }
    ++checked;
  }
  CHECK(checked >= 6);
}

TEST_CASE("g_emp is convex: subgradient inequality on random pairs") {
  rng::Stream s(31, 1);
  const int d = 3, n = 40;
  Eigen::MatrixXd scen(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) scen(i, j) = 2.0 * s.uniform();
  const TailLevel a(0.9);
  for (int rep = 0; rep < 50; ++rep) {
    AuxiliaryPoint u, v;
    u.gamma = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return s.normal(); });
    v.gamma = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return s.normal(); });
    u.zeta = s.normal();
    v.zeta = s.normal();
    const Eigen::VectorXd sub = g_subgradient(u, scen, a);
    Eigen::VectorXd du(d + 1);
    du.head(d) = v.gamma - u.gamma;
    du[d] = v.zeta - u.zeta;
    CHECK(g_emp(v, scen, a) >= g_emp(u, scen, a) + sub.dot(du) - 1e-10);
  }
}

TEST_CASE("gaussian CVaR: zero portfolio, one line, and the benchmark loop") {
  const auto model1 = GaussianModel::unit_mean(Eigen::MatrixXd::Identity(1, 1));
  CHECK(gaussian_cvar(Eigen::VectorXd::Zero(1), model1, TailLevel(0.99)) == 0.0);
  CHECK(gaussian_cvar(Eigen::VectorXd::Ones(1), model1, TailLevel(0.99)) ==
        doctest::Approx(1.665214220345806).epsilon(1e-12));

  // the frozen benchmark optimum saturates the budget exactly
  const auto model = testutil::bench_model();
  CHECK(gaussian_cvar(testutil::bench_gamma_star(), model, TailLevel(0.99)) ==
        doctest::Approx(100.0).epsilon(1e-12));

  CHECK_THROWS_WITH_AS(gaussian_cvar(Eigen::VectorXd::Zero(3), model1, TailLevel(0.99)),
                       "gaussian_cvar: dimension mismatch", std::invalid_argument);
}

TEST_CASE("gaussian CVaR: exact homogeneity/translation and strict convexity") {
  const auto model = testutil::bench_model();
  const TailLevel a(0.99);
  rng::Stream s(7, 4);
  Eigen::VectorXd g1 = Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return s.uniform() * 5; });
  Eigen::VectorXd g2 = Eigen::VectorXd::NullaryExpr(5, [&](Eigen::Index) { return s.uniform() * 5; });
  // positive homogeneity, exact for a power-of-two scale
  CHECK(gaussian_cvar((2.0 * g1).eval(), model, a) == 2.0 * gaussian_cvar(g1, model, a));
  // midpoint strict convexity for non-collinear portfolios
  const double mid = gaussian_cvar((0.5 * (g1 + g2)).eval(), model, a);
  const double avg = 0.5 * (gaussian_cvar(g1, model, a) + gaussian_cvar(g2, model, a));
  CHECK(mid < avg);
  CHECK(avg - mid > 1e-6);  // strictly positive margin
}
