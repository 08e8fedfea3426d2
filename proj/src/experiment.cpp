#include "cvarsaa/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

#include "cvarsaa/gaussian_oracle.hpp"
#include "cvarsaa/rng.hpp"
#include "cvarsaa/stats.hpp"

namespace cvarsaa {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

int resolve_workers(int requested, Eigen::Index k) {
  if (requested > 0) return int(std::min<Eigen::Index>(requested, k));
  long w = long(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CVAR_SAA_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) w = parsed;
  }
  return int(std::max<long>(1, std::min<long>(w, long(k))));
}

Eigen::VectorXd surviving(const Eigen::VectorXd& v, const std::vector<char>& failed) {
  Eigen::VectorXd out(v.size());
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!failed[std::size_t(i)]) out[m++] = v[i];
  return out.head(m).eval();
}

}  // namespace

Eigen::Index ReplicationSet::failures() const {
  Eigen::Index f = 0;
  for (char c : failed) f += c != 0;
  return f;
}

ReplicationSet run_replications(const ProblemSpec& spec, const Market& market,
                                Eigen::Index n, Eigen::Index k,
                                std::uint64_t base_seed, int workers) {
  spec.validate();
  market.validate();
  if (k < 2) throw std::invalid_argument("need at least 2 replications");
  if (double(n) * (1.0 - spec.alpha.alpha) < 2.0)
    throw std::invalid_argument("sample too small for tail level");

  ReplicationSet rep;
  rep.n = n;
  rep.k = k;
  rep.base_seed = base_seed;
  rep.values = Eigen::VectorXd::Constant(k, kNan);
  rep.zetas = Eigen::VectorXd::Constant(k, kNan);
  rep.lambdas = Eigen::VectorXd::Constant(k, kNan);
  rep.gammas = Eigen::MatrixXd::Constant(k, spec.dim(), kNan);
  rep.failed.assign(std::size_t(k), 0);

  std::atomic<Eigen::Index> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> errored{false};

  auto worker = [&]() {
    for (;;) {
      const Eigen::Index i = next.fetch_add(1);
      if (i >= k || errored.load()) return;
      try {
        const std::uint64_t seed = rng::derive_seed(base_seed, std::uint64_t(i));
        const SaaProblem prob = assemble_problem(spec, sample_market(market, n, seed));
        const Solution sol = solve_cutting_plane(prob);
        rep.values[i] = sol.value;
        rep.zetas[i] = sol.zeta;
        rep.lambdas[i] = sol.lambda;
        rep.gammas.row(i) = sol.gamma.transpose();
      } catch (const InfeasibleError&) {
        rep.failed[std::size_t(i)] = 1;
      } catch (const ConvergenceError&) {
        rep.failed[std::size_t(i)] = 1;
      } catch (...) {
        if (!errored.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };

  const int nw = resolve_workers(workers, k);
  if (nw <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(nw));
    for (int t = 0; t < nw; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (errored.load()) std::rethrow_exception(first_error);
  return rep;
}

BoxStats box_stats(const Eigen::VectorXd& samples) {
  if (samples.size() < 2) throw std::invalid_argument("box_stats: need at least 2 samples");
  std::vector<double> v(samples.data(), samples.data() + samples.size());
  BoxStats b;
  b.mean = samples.mean();
  b.stddev = std::sqrt((samples.array() - b.mean).square().sum() / double(samples.size() - 1));
  b.q1 = stats::quantile_type7(v, 0.25);
  b.median = stats::quantile_type7(v, 0.5);
  b.q3 = stats::quantile_type7(v, 0.75);
  const double iqr = b.q3 - b.q1;
  b.whisker_low = b.q1 - 1.5 * iqr;
  b.whisker_high = b.q3 + 1.5 * iqr;
  return b;
}

NormalFit normal_fit(const Eigen::VectorXd& samples) {
  if (samples.size() < 30)
    throw std::invalid_argument("need at least 30 samples for a normal fit");
  NormalFit f;
  f.mu = samples.mean();
  f.sigma =
      std::sqrt((samples.array() - f.mu).square().sum() / double(samples.size() - 1));
  if (f.sigma == 0.0) {
    f.ks = 0.0;
    return f;
  }
  std::vector<double> v(samples.data(), samples.data() + samples.size());
  const double mu = f.mu, sg = f.sigma;
  f.ks = stats::ks_statistic(v, [mu, sg](double x) { return stats::norm_cdf((x - mu) / sg); });
  return f;
}

ConvergenceStudy convergence_study(const ProblemSpec& spec, const Market& market,
                                   std::vector<Eigen::Index> n_grid, Eigen::Index k,
                                   std::uint64_t base_seed, int workers) {
  std::sort(n_grid.begin(), n_grid.end());
  n_grid.erase(std::unique(n_grid.begin(), n_grid.end()), n_grid.end());
  if (n_grid.size() < 3)
    throw std::invalid_argument("convergence study needs at least 3 grid sizes");

  ConvergenceStudy study;
  study.n_grid = n_grid;
  const Eigen::Index d = spec.dim();

  std::optional<GaussianSolution> oracle;
  if (market.is_gaussian && spec.loss == LossKind::linear) {
    try {
      oracle = solve_gaussian(spec.capital, market.model, spec.alpha);
    } catch (const std::domain_error&) {
      // no closed form at this tail level; fall back to the empirical reference
    }
  }
  study.has_oracle = oracle.has_value();

  std::vector<double> log_n, log_sv;
  std::vector<std::vector<double>> log_sg(static_cast<std::size_t>(d));
  for (const Eigen::Index n : n_grid) {
    ReplicationSet rep =
        run_replications(spec, market, n, k, rng::derive_seed(base_seed, std::uint64_t(n)),
                         workers);
    NSummary s;
    s.n = n;
    s.failures = rep.failures();
    const Eigen::VectorXd vals = surviving(rep.values, rep.failed);
    s.value = box_stats(vals);
    for (Eigen::Index j = 0; j < d; ++j)
      s.gamma.push_back(box_stats(surviving(rep.gammas.col(j), rep.failed)));
    if (oracle) {
      Eigen::VectorXd mean_gamma(d);
      for (Eigen::Index j = 0; j < d; ++j) mean_gamma[j] = s.gamma[std::size_t(j)].mean;
      s.oracle_distance = (mean_gamma - oracle->gamma_star).cwiseAbs().maxCoeff();
    } else {
      s.oracle_distance = kNan;
    }
    if (s.value.stddev <= 0.0) study.degenerate = true;
    for (Eigen::Index j = 0; j < d; ++j)
      if (s.gamma[std::size_t(j)].stddev <= 0.0) study.degenerate = true;
    log_n.push_back(std::log10(double(n)));
    log_sv.push_back(s.value.stddev > 0.0 ? std::log10(s.value.stddev) : kNan);
    for (Eigen::Index j = 0; j < d; ++j)
      log_sg[std::size_t(j)].push_back(s.gamma[std::size_t(j)].stddev > 0.0
                                           ? std::log10(s.gamma[std::size_t(j)].stddev)
                                           : kNan);
    study.summaries.push_back(std::move(s));
    if (n == n_grid.back()) study.largest = std::move(rep);
  }

  study.slope_value = study.degenerate ? kNan : stats::ols_slope(log_n, log_sv);
  study.slope_gamma.resize(d);
  for (Eigen::Index j = 0; j < d; ++j)
    study.slope_gamma[j] =
        study.degenerate ? kNan : stats::ols_slope(log_n, log_sg[std::size_t(j)]);

  study.reference_value =
      oracle ? oracle->v_star : study.summaries.back().value.mean;
  const Eigen::VectorXd tail_vals = surviving(study.largest.values, study.largest.failed);
  study.clt = normal_fit(std::sqrt(double(n_grid.back())) *
                         (tail_vals.array() - study.reference_value).matrix());
  return study;
}

std::vector<MultiLawRow> multi_law_table(
    const ProblemSpec& unbounded, const std::optional<ProblemSpec>& bounded,
    const std::vector<MarginalSpec>& marginals, const Eigen::MatrixXd& copula_correlation,
    double clayton_theta, Eigen::Index n, std::uint64_t seed) {
  const std::vector<std::pair<std::string, DependenceSpec>> deps = {
      {"independent", DependenceSpec::independent()},
      {"gaussian", DependenceSpec::gaussian_copula(copula_correlation)},
      {"clayton", DependenceSpec::clayton(clayton_theta)},
  };
  std::vector<MultiLawRow> rows;
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const Market market = Market::multi_law(marginals, deps[i].second);
    const ScenarioMatrix scen =
        sample_market(market, n, rng::derive_seed(seed, std::uint64_t(i)));
    rows.push_back({deps[i].first, false,
                    solve_cutting_plane(assemble_problem(unbounded, scen))});
    if (bounded)
      rows.push_back({deps[i].first, true,
                      solve_cutting_plane(assemble_problem(*bounded, scen))});
  }
  return rows;
}

}  // namespace cvarsaa
