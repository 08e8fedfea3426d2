// cvar-saa: solve / oracle / experiment / sample driver around libcvarsaa.
//
// Exit codes: 0 success, 1 invalid input or config, 2 infeasible problem,
// 3 solver failed to converge.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "cvarsaa/io.hpp"
#include "cvarsaa/rng.hpp"

namespace {

using namespace cvarsaa;
namespace fs = std::filesystem;

struct Args {
  std::string config;
  std::int64_t n = -1;
  std::int64_t seed = -1;
  std::string solver;
  std::string out;
  std::string solution;
  bool full = false;
};

void apply_overrides(io::RunConfig& cfg, const Args& a) {
  if (a.n >= 0) {
    if (a.n == 0) throw io::ConfigError("--n must be a positive integer");
    cfg.run.n = Eigen::Index(a.n);
  }
  if (a.seed >= 0) cfg.run.seed = std::uint64_t(a.seed);
  if (!a.solver.empty()) {
    if (a.solver != "cutting_plane" && a.solver != "epigraph_lp" && a.solver != "grid")
      throw io::ConfigError("--solver must be one of cutting_plane, epigraph_lp, grid");
    cfg.run.solver = a.solver;
  }
}

std::string artifact_path(const io::RunConfig& cfg, const Args& a, const char* name) {
  if (!a.out.empty()) return a.out;
  fs::create_directories(cfg.run.out_dir);
  return (fs::path(cfg.run.out_dir) / name).string();
}

void print_vector(const char* label, const Eigen::VectorXd& v) {
  std::printf("%s:", label);
  for (Eigen::Index i = 0; i < v.size(); ++i) std::printf(" %.12g", v[i]);
  std::printf("\n");
}

Solution dispatch_solver(const io::RunConfig& cfg, const SaaProblem& prob) {
  if (cfg.run.solver == "epigraph_lp") return solve_epigraph_lp(prob);
  if (cfg.run.solver == "grid") return solve_direct_grid(prob);
  return solve_cutting_plane(prob, cfg.run.tolerance);
}

int run_solve(const Args& a) {
  io::RunConfig cfg = io::load_config(a.config);
  apply_overrides(cfg, a);
  const ScenarioMatrix scen = sample_market(cfg.market, cfg.run.n, cfg.run.seed);
  const SaaProblem prob = assemble_problem(cfg.problem, scen);
  const Solution sol = dispatch_solver(cfg, prob);

  const std::string path = artifact_path(cfg, a, "solution.json");
  io::write_text(path, io::solution_to_json(sol, cfg.config_hash, cfg.run.seed,
                                            cfg.run.n).dump(2) + "\n");

  std::printf("solver: %s (iterations %ld, cuts %ld)\n", sol.solver.c_str(),
              sol.iterations, sol.cuts);
  std::printf("n: %lld  seed: %llu  config: %s\n",
              static_cast<long long>(cfg.run.n),
              static_cast<unsigned long long>(cfg.run.seed), cfg.config_hash.c_str());
  print_vector("gamma", sol.gamma);
  std::printf("zeta: %.12g\n", sol.zeta);
  std::printf("value: %.12g\n", sol.value);
  std::printf("budget constraint: %s (residual %.3g), lambda %.12g\n",
              sol.active_constraint ? "active" : "inactive", sol.constraint_residual,
              sol.lambda);
  const MultiplierReport rep = extract_multiplier(prob, sol);
  if (rep.crosscheck_available)
    std::printf("multiplier formula cross-check: %.12g (%s)\n", *rep.lambda_formula,
                rep.note.c_str());
  else
    std::printf("warning: %s (no strictly interior coordinate)\n", rep.note.c_str());
  if (sol.small_tail)
    std::printf("warning: fewer than 10 scenarios in the tail; estimates are noisy\n");
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int run_oracle(const Args& a) {
  io::RunConfig cfg = io::load_config(a.config);
  apply_overrides(cfg, a);
  if (!cfg.market.is_gaussian) throw io::ConfigError("oracle requires gaussian market");
  const GaussianSolution g =
      solve_gaussian(cfg.problem.capital, cfg.market.model, cfg.problem.alpha);

  const std::string path = artifact_path(cfg, a, "oracle.json");
  io::write_text(path, io::gaussian_to_json(g, cfg.config_hash).dump(2) + "\n");

  print_vector("gamma_star", g.gamma_star);
  std::printf("v_star: %.12g\nlambda_star: %.12g\nsigma_s: %.12g\nsigma_clt: %.12g\n",
              g.v_star, g.lambda_star, g.sigma_s, g.sigma_clt);
  const bool inside = (g.gamma_star.array() >= cfg.problem.gamma_low.array()).all() &&
                      (g.gamma_star.array() <= cfg.problem.gamma_up.array()).all();
  if (!inside)
    std::printf("warning: closed form ignores the box; gamma_star leaves "
                "[gamma_low, gamma_up]\n");

  if (!a.solution.empty()) {
    std::ifstream in(a.solution);
    if (!in) throw io::ConfigError("cannot open solution file: " + a.solution);
    nlohmann::json sj;
    in >> sj;
    const Solution est = io::solution_from_json(sj);
    if (est.gamma.size() != g.gamma_star.size())
      throw io::ConfigError("solution dimension does not match the market");
    std::printf("component  closed_form      estimate         rel_error\n");
    for (Eigen::Index i = 0; i < est.gamma.size(); ++i)
      std::printf("gamma%-4lld %-16.10g %-16.10g %.3e\n", static_cast<long long>(i + 1),
                  g.gamma_star[i], est.gamma[i],
                  std::abs(est.gamma[i] - g.gamma_star[i]) /
                      std::max(1.0, std::abs(g.gamma_star[i])));
    std::printf("value      %-16.10g %-16.10g %.3e\n", g.v_star, est.value,
                std::abs(est.value - g.v_star) / std::max(1.0, std::abs(g.v_star)));
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int run_experiment(const Args& a) {
  io::RunConfig cfg = io::load_config(a.config);
  apply_overrides(cfg, a);
  if (cfg.run.n_grid.empty()) throw io::ConfigError("missing field: run.n_grid");
  Eigen::Index k = a.full ? 5000 : cfg.run.k;
  if (k < 2) throw io::ConfigError("run.k must be at least 2");

  const ConvergenceStudy study =
      convergence_study(cfg.problem, cfg.market, cfg.run.n_grid, k, cfg.run.seed);

  const std::string dir = a.out.empty() ? cfg.run.out_dir : a.out;
  fs::create_directories(dir);
  const std::string csv = (fs::path(dir) / "report.csv").string();
  const std::string jsn = (fs::path(dir) / "report.json").string();
  const std::string hist = (fs::path(dir) / "histogram.csv").string();
  io::write_report_csv(csv, study, cfg.config_hash, cfg.run.seed);
  io::write_text(jsn, io::study_to_json(study, cfg.config_hash, cfg.run.seed).dump(2) + "\n");

  Eigen::VectorXd scaled(study.largest.k);
  Eigen::Index m = 0;
  for (Eigen::Index i = 0; i < study.largest.k; ++i)
    if (!study.largest.failed[std::size_t(i)])
      scaled[m++] = std::sqrt(double(study.largest.n)) *
                    (study.largest.values[i] - study.reference_value);
  io::write_histogram_csv(hist, scaled.head(m), cfg.config_hash, cfg.run.seed);

  std::printf("n        mean(v)          std(v)        failures\n");
  for (const NSummary& s : study.summaries)
    std::printf("%-8lld %-16.10g %-13.6g %lld\n", static_cast<long long>(s.n),
                s.value.mean, s.value.stddev, static_cast<long long>(s.failures));
  std::printf("slope of log10 std vs log10 n: v %.4f, gamma", study.slope_value);
  for (Eigen::Index i = 0; i < study.slope_gamma.size(); ++i)
    std::printf(" %.4f", study.slope_gamma[i]);
  std::printf("\n");
  if (study.degenerate)
    std::printf("warning: a zero sample std made at least one slope undefined\n");
  std::printf("clt fit at n=%lld: mu %.6g, sigma %.10g, ks %.4f (reference %s %.12g)\n",
              static_cast<long long>(study.largest.n), study.clt.mu, study.clt.sigma,
              study.clt.ks, study.has_oracle ? "v_star" : "mean", study.reference_value);
  std::printf("wrote %s %s %s\n", csv.c_str(), jsn.c_str(), hist.c_str());
  return 0;
}

int run_sample(const Args& a) {
  io::RunConfig cfg = io::load_config(a.config);
  apply_overrides(cfg, a);
  const ScenarioMatrix scen = sample_market(cfg.market, cfg.run.n, cfg.run.seed);
  const std::string path = artifact_path(cfg, a, "scenarios.csv");
  io::write_scenario_csv(path, scen, cfg.config_hash);
  std::printf("wrote %lld x %lld scenarios (seed %llu) to %s\n",
              static_cast<long long>(scen.n()), static_cast<long long>(scen.dim()),
              static_cast<unsigned long long>(cfg.run.seed), path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CVaR-budget portfolio allocation via sample average approximation"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", args.config, "JSON config file")->required();
    sub->add_option("--n", args.n, "override run.n");
    sub->add_option("--seed", args.seed, "override run.seed");
    sub->add_option("--out", args.out, "output path (directory for experiment)");
  };
  CLI::App* solve = app.add_subcommand("solve", "solve one sampled instance");
  add_common(solve);
  solve->add_option("--solver", args.solver, "cutting_plane | epigraph_lp | grid");
  CLI::App* oracle = app.add_subcommand("oracle", "closed-form gaussian solution");
  add_common(oracle);
  oracle->add_option("--solution", args.solution, "solution.json to compare against");
  CLI::App* experiment =
      app.add_subcommand("experiment", "replicated convergence study over run.n_grid");
  add_common(experiment);
  experiment->add_flag("--full", args.full, "use 5000 replications per grid size");
  CLI::App* sample = app.add_subcommand("sample", "write a scenario csv");
  add_common(sample);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (solve->parsed()) return run_solve(args);
    if (oracle->parsed()) return run_oracle(args);
    if (experiment->parsed()) return run_experiment(args);
    return run_sample(args);
  } catch (const InfeasibleError& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return 2;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "no convergence: %s\n", e.what());
    return 3;
  } catch (const io::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
