#include "cvarsaa/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cvarsaa::io {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail("missing field: " + path);
  return j.at(key);
}

double number_at(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path + " must be a number");
  return j.get<double>();
}

std::uint64_t unsigned_at(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0)
    return std::uint64_t(j.get<std::int64_t>());
  fail(path + " must be a nonnegative integer");
}

Eigen::Index index_at(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<std::int64_t>() <= 0)
    fail(path + " must be a positive integer");
  return Eigen::Index(j.get<std::int64_t>());
}

Eigen::VectorXd vector_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path + " must be a non-empty array");
  Eigen::VectorXd v(Eigen::Index(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(path + " must contain only numbers");
    v[Eigen::Index(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_at(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path + " must be a non-empty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail(path + " rows must be non-empty arrays");
  const std::size_t cols = j[0].size();
  if (cols != rows) fail(path + " must be square");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) fail(path + " must be square");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) fail(path + " must contain only numbers");
      m(Eigen::Index(r), Eigen::Index(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

void parse_loss(const json& problem, ProblemSpec& spec) {
  if (!problem.contains("loss")) return;  // linear by default
  const json& loss = problem.at("loss");
  if (loss.is_string()) {
    if (loss.get<std::string>() == "linear") return;
    fail("problem.loss must be \"linear\" or a cost_of_capital object");
  }
  if (!loss.is_object() || !loss.contains("kind"))
    fail("problem.loss must be \"linear\" or a cost_of_capital object");
  const std::string kind = loss.at("kind").is_string() ? loss.at("kind").get<std::string>() : "";
  if (kind == "linear") return;
  if (kind != "cost_of_capital")
    fail("problem.loss.kind must be \"linear\" or \"cost_of_capital\"");
  spec.loss = LossKind::cost_of_capital;
  const double c = number_at(require(loss, "c", "problem.loss.c"), "problem.loss.c");
  if (!(c > 0.0 && c < 1.0)) fail("problem.loss.c must lie in (0,1)");
  spec.capital_cost = c;
}

ProblemSpec parse_problem(const json& root) {
  const json& p = require(root, "problem", "problem");
  ProblemSpec spec;
  if (p.contains("alpha")) {
    const double a = number_at(p.at("alpha"), "problem.alpha");
    if (!(a > 0.0 && a < 1.0)) fail("problem.alpha must lie in (0,1)");
    spec.alpha = TailLevel(a);
  }
  spec.capital = number_at(require(p, "capital", "problem.capital"), "problem.capital");
  spec.gamma_low = vector_at(require(p, "gamma_low", "problem.gamma_low"), "problem.gamma_low");
  spec.gamma_up = vector_at(require(p, "gamma_up", "problem.gamma_up"), "problem.gamma_up");
  if (spec.gamma_low.size() != spec.gamma_up.size())
    fail("problem.gamma_low and problem.gamma_up must have equal length");
  if ((spec.gamma_low.array() > spec.gamma_up.array()).any())
    fail("problem.gamma_low must not exceed problem.gamma_up");
  parse_loss(p, spec);
  if (p.contains("zeta_low")) spec.zeta_low = number_at(p.at("zeta_low"), "problem.zeta_low");
  if (p.contains("zeta_up")) spec.zeta_up = number_at(p.at("zeta_up"), "problem.zeta_up");
  return spec;
}

MarginalSpec parse_marginal(const json& j, const std::string& path) {
  const std::string family =
      require(j, "family", path + ".family").is_string()
          ? j.at("family").get<std::string>()
          : "";
  if (family == "gaussian")
    return MarginalSpec::make_gaussian(
        number_at(require(j, "mu", path + ".mu"), path + ".mu"),
        number_at(require(j, "sigma", path + ".sigma"), path + ".sigma"));
  if (family == "generalized_pareto")
    return MarginalSpec::make_gpd(
        number_at(require(j, "xi", path + ".xi"), path + ".xi"),
        j.contains("beta") ? number_at(j.at("beta"), path + ".beta") : 1.0);
  if (family == "lognormal")
    return MarginalSpec::make_lognormal(
        number_at(require(j, "mu_log", path + ".mu_log"), path + ".mu_log"),
        number_at(require(j, "sigma_log", path + ".sigma_log"), path + ".sigma_log"));
  fail(path + ".family must be one of gaussian, generalized_pareto, lognormal");
}

Market parse_market(const json& root) {
  const json& m = require(root, "market", "market");
  const bool has_gaussian = m.is_object() && m.contains("gaussian");
  const bool has_multi = m.is_object() && m.contains("multi_law");
  if (has_gaussian == has_multi)
    fail("market must contain exactly one of gaussian, multi_law");

  if (has_gaussian) {
    const json& g = m.at("gaussian");
    Eigen::MatrixXd sigma =
        matrix_at(require(g, "sigma", "market.gaussian.sigma"), "market.gaussian.sigma");
    GaussianModel model = GaussianModel::unit_mean(std::move(sigma));
    if (g.contains("mean")) {
      model.mean = vector_at(g.at("mean"), "market.gaussian.mean");
      if (model.mean.size() != model.sigma.rows())
        fail("market.gaussian.mean length does not match sigma");
    }
    return Market::gaussian(std::move(model));
  }

  const json& ml = m.at("multi_law");
  const json& margs = require(ml, "marginals", "market.multi_law.marginals");
  if (!margs.is_array() || margs.empty())
    fail("market.multi_law.marginals must be a non-empty array");
  std::vector<MarginalSpec> marginals;
  for (std::size_t i = 0; i < margs.size(); ++i)
    marginals.push_back(parse_marginal(
        margs[i], "market.multi_law.marginals[" + std::to_string(i) + "]"));

  const json& dep = require(ml, "dependence", "market.multi_law.dependence");
  const json& kindj = require(dep, "kind", "market.multi_law.dependence.kind");
  const std::string kind = kindj.is_string() ? kindj.get<std::string>() : "";
  DependenceSpec ds;
  if (kind == "independent") {
    ds = DependenceSpec::independent();
  } else if (kind == "gaussian") {
    Eigen::MatrixXd corr = matrix_at(
        require(dep, "correlation", "market.multi_law.dependence.correlation"),
        "market.multi_law.dependence.correlation");
    if (corr.rows() != Eigen::Index(marginals.size()))
      fail("market.multi_law.dependence.correlation must match the number of marginals");
    ds = DependenceSpec::gaussian_copula(std::move(corr));
  } else if (kind == "clayton") {
    const double theta = number_at(
        require(dep, "theta", "market.multi_law.dependence.theta"),
        "market.multi_law.dependence.theta");
    if (!(theta > 0.0)) fail("market.multi_law.dependence.theta must be positive");
    ds = DependenceSpec::clayton(theta);
  } else {
    fail("market.multi_law.dependence.kind must be one of independent, gaussian, clayton");
  }
  return Market::multi_law(std::move(marginals), std::move(ds));
}

RunSettings parse_run(const json& root) {
  const json& r = require(root, "run", "run");
  RunSettings run;
  run.n = index_at(require(r, "n", "run.n"), "run.n");
  if (r.contains("k")) run.k = index_at(r.at("k"), "run.k");
  if (r.contains("n_grid")) {
    const json& grid = r.at("n_grid");
    if (!grid.is_array() || grid.empty()) fail("run.n_grid must be a non-empty array");
    for (std::size_t i = 0; i < grid.size(); ++i)
      run.n_grid.push_back(index_at(grid[i], "run.n_grid"));
  }
  if (r.contains("seed")) run.seed = unsigned_at(r.at("seed"), "run.seed");
  if (r.contains("solver")) {
    if (!r.at("solver").is_string()) fail("run.solver must be a string");
    run.solver = r.at("solver").get<std::string>();
    if (run.solver != "cutting_plane" && run.solver != "epigraph_lp" && run.solver != "grid")
      fail("run.solver must be one of cutting_plane, epigraph_lp, grid");
  }
  if (r.contains("tolerance")) {
    run.tolerance = number_at(r.at("tolerance"), "run.tolerance");
    if (!(run.tolerance > 0.0)) fail("run.tolerance must be positive");
  }
  if (r.contains("out_dir")) {
    if (!r.at("out_dir").is_string()) fail("run.out_dir must be a string");
    run.out_dir = r.at("out_dir").get<std::string>();
  }
  return run;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

RunConfig parse_config(const json& root) {
  if (!root.is_object()) fail("config root must be an object");
  RunConfig cfg;
  cfg.problem = parse_problem(root);
  cfg.market = parse_market(root);
  cfg.run = parse_run(root);
  if (cfg.problem.dim() != cfg.market.dim())
    fail("problem.gamma_low length does not match market dimension");
  if (root.contains("bounded_problem")) {
    const json& b = root.at("bounded_problem");
    ProblemSpec bounded = cfg.problem;
    bounded.gamma_low = vector_at(require(b, "gamma_low", "bounded_problem.gamma_low"),
                                  "bounded_problem.gamma_low");
    bounded.gamma_up = vector_at(require(b, "gamma_up", "bounded_problem.gamma_up"),
                                 "bounded_problem.gamma_up");
    if (bounded.gamma_low.size() != bounded.gamma_up.size())
      fail("bounded_problem.gamma_low and bounded_problem.gamma_up must have equal length");
    if (bounded.dim() != cfg.market.dim())
      fail("bounded_problem.gamma_low length does not match market dimension");
    if ((bounded.gamma_low.array() > bounded.gamma_up.array()).any())
      fail("bounded_problem.gamma_low must not exceed bounded_problem.gamma_up");
    cfg.bounded_problem = std::move(bounded);
  }
  try {
    cfg.problem.validate();
    if (cfg.bounded_problem) cfg.bounded_problem->validate();
    cfg.market.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  cfg.config_hash = hash_hex(root);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open config file: " + path);
  json root;
  try {
    in >> root;
  } catch (const json::parse_error& e) {
    fail("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(root);
}

std::string hash_hex(const json& canonical) {
  const std::string dump = canonical.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json solution_to_json(const Solution& s, const std::string& config_hash,
                                std::uint64_t seed, Eigen::Index n) {
  json j;
  j["gamma"] = std::vector<double>(s.gamma.data(), s.gamma.data() + s.gamma.size());
  j["zeta"] = s.zeta;
  j["value"] = s.value;
  j["lambda"] = s.lambda;
  j["bound_duals"]["lower"] = std::vector<double>(
      s.bound_dual_low.data(), s.bound_dual_low.data() + s.bound_dual_low.size());
  j["bound_duals"]["upper"] = std::vector<double>(
      s.bound_dual_up.data(), s.bound_dual_up.data() + s.bound_dual_up.size());
  j["active_constraint"] = s.active_constraint;
  j["iterations"] = s.iterations;
  j["cuts"] = s.cuts;
  j["solver"] = s.solver;
  j["residuals"]["constraint"] = s.constraint_residual;
  j["residuals"]["complementary_slackness"] = s.compl_slack;
  j["small_tail"] = s.small_tail;
  j["provenance"]["config_hash"] = config_hash;
  j["provenance"]["seed"] = seed;
  j["provenance"]["n"] = n;
  return j;
}

Solution solution_from_json(const nlohmann::json& j) {
  Solution s;
  const Eigen::VectorXd gamma = vector_at(require(j, "gamma", "gamma"), "gamma");
  s.gamma = gamma;
  s.zeta = number_at(require(j, "zeta", "zeta"), "zeta");
  s.value = number_at(require(j, "value", "value"), "value");
  s.lambda = number_at(require(j, "lambda", "lambda"), "lambda");
  if (j.contains("bound_duals")) {
    s.bound_dual_low = vector_at(j.at("bound_duals").at("lower"), "bound_duals.lower");
    s.bound_dual_up = vector_at(j.at("bound_duals").at("upper"), "bound_duals.upper");
  }
  if (j.contains("active_constraint")) s.active_constraint = j.at("active_constraint").get<bool>();
  if (j.contains("iterations")) s.iterations = j.at("iterations").get<long>();
  if (j.contains("cuts")) s.cuts = j.at("cuts").get<long>();
  if (j.contains("solver")) s.solver = j.at("solver").get<std::string>();
  if (j.contains("residuals")) {
    s.constraint_residual = j.at("residuals").value("constraint", 0.0);
    s.compl_slack = j.at("residuals").value("complementary_slackness", 0.0);
  }
  if (j.contains("small_tail")) s.small_tail = j.at("small_tail").get<bool>();
  return s;
}

nlohmann::json gaussian_to_json(const GaussianSolution& g, const std::string& config_hash) {
  json j;
  j["gamma_star"] =
      std::vector<double>(g.gamma_star.data(), g.gamma_star.data() + g.gamma_star.size());
  j["v_star"] = g.v_star;
  j["lambda_star"] = g.lambda_star;
  j["sigma_s"] = g.sigma_s;
  j["sigma_clt"] = g.sigma_clt;
  j["provenance"]["config_hash"] = config_hash;
  return j;
}

nlohmann::json study_to_json(const ConvergenceStudy& st, const std::string& config_hash,
                             std::uint64_t base_seed) {
  json j;
  j["n_grid"] = st.n_grid;
  j["slopes"]["value"] = st.slope_value;
  j["slopes"]["gamma"] = std::vector<double>(
      st.slope_gamma.data(), st.slope_gamma.data() + st.slope_gamma.size());
  j["degenerate"] = st.degenerate;
  j["has_oracle"] = st.has_oracle;
  j["reference_value"] = st.reference_value;
  j["clt"] = {{"mu", st.clt.mu}, {"sigma", st.clt.sigma}, {"ks", st.clt.ks}};
  auto box = [](const BoxStats& b) {
    return json{{"mean", b.mean},
                {"std", b.stddev},
                {"q1", b.q1},
                {"median", b.median},
                {"q3", b.q3},
                {"whisker_low", b.whisker_low},
                {"whisker_high", b.whisker_high}};
  };
  j["summaries"] = json::array();
  for (const NSummary& s : st.summaries) {
    json row;
    row["n"] = s.n;
    row["failures"] = s.failures;
    row["oracle_distance"] = s.oracle_distance;
    row["value"] = box(s.value);
    row["gamma"] = json::array();
    for (const BoxStats& b : s.gamma) row["gamma"].push_back(box(b));
    j["summaries"].push_back(std::move(row));
  }
  j["provenance"]["config_hash"] = config_hash;
  j["provenance"]["base_seed"] = base_seed;
  return j;
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << body;
}

void write_scenario_csv(const std::string& path, const ScenarioMatrix& scen,
                        const std::string& config_hash) {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << " seed=" << scen.seed << "\n";
  for (Eigen::Index c = 0; c < scen.dim(); ++c) os << (c ? ",x" : "x") << c + 1;
  os << "\n";
  for (Eigen::Index r = 0; r < scen.n(); ++r) {
    for (Eigen::Index c = 0; c < scen.dim(); ++c) {
      if (c) os << ',';
      os << fmt17(scen.data(r, c));
    }
    os << "\n";
  }
  write_text(path, os.str());
}

ScenarioMatrix load_scenario_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_skipped) {
      header_skipped = true;
      continue;
    }
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string tok =
          line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      row.push_back(std::strtod(tok.c_str(), nullptr));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("scenario csv: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("scenario csv: no data rows");
  Eigen::MatrixXd data(Eigen::Index(rows.size()), Eigen::Index(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      data(Eigen::Index(r), Eigen::Index(c)) = rows[r][c];
  return make_scenarios(std::move(data), 0);
}

void write_report_csv(const std::string& path, const ConvergenceStudy& st,
                      const std::string& config_hash, std::uint64_t base_seed) {
  std::ostringstream os;
  os << "# config_hash=" << config_hash << " base_seed=" << base_seed << "\n";
  os << "n,stat,target,value\n";
  auto emit = [&](Eigen::Index n, const char* stat, const std::string& target, double v) {
    os << n << ',' << stat << ',' << target << ',' << fmt17(v) << "\n";
  };
  auto emit_box = [&](Eigen::Index n, const std::string& target, const BoxStats& b) {
    emit(n, "mean", target, b.mean);
    emit(n, "std", target, b.stddev);
    emit(n, "q1", target, b.q1);
    emit(n, "median", target, b.median);
    emit(n, "q3", target, b.q3);
    emit(n, "whisker_low", target, b.whisker_low);
    emit(n, "whisker_high", target, b.whisker_high);
  };
  for (const NSummary& s : st.summaries) {
    emit_box(s.n, "v", s.value);
    for (std::size_t jx = 0; jx < s.gamma.size(); ++jx)
      emit_box(s.n, "gamma" + std::to_string(jx + 1), s.gamma[jx]);
    if (st.has_oracle) emit(s.n, "mean", "oracle_distance", s.oracle_distance);
  }
  emit(0, "slope", "v", st.slope_value);
  for (Eigen::Index jx = 0; jx < st.slope_gamma.size(); ++jx)
    emit(0, "slope", "gamma" + std::to_string(jx + 1), st.slope_gamma[jx]);
  write_text(path, os.str());
}

void write_histogram_csv(const std::string& path, const Eigen::VectorXd& samples,
                         const std::string& config_hash, std::uint64_t base_seed) {
  if (samples.size() == 0) throw std::invalid_argument("histogram: empty sample");
  const double lo = samples.minCoeff(), hi = samples.maxCoeff();
  std::ostringstream os;
  os << "# config_hash=" << config_hash << " base_seed=" << base_seed << "\n";
  os << "bin_left,bin_right,count\n";
  if (hi == lo) {
    os << fmt17(lo) << ',' << fmt17(hi) << ',' << samples.size() << "\n";
    write_text(path, os.str());
    return;
  }
  const int nbins =
      int(std::ceil(std::log2(double(samples.size())))) + 1;  // Sturges
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(nbins);
  const double width = (hi - lo) / nbins;
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    int b = int((samples[i] - lo) / width);
    counts[std::min(std::max(b, 0), nbins - 1)] += 1;
  }
  for (int b = 0; b < nbins; ++b)
    os << fmt17(lo + b * width) << ',' << fmt17(lo + (b + 1) * width) << ','
       << counts[b] << "\n";
  write_text(path, os.str());
}

}  // namespace cvarsaa::io
