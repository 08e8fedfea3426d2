#pragma once
// Config files, result serialization, and the CSV artifacts the CLI and
// experiment drivers emit.  Every artifact embeds the config hash (FNV-1a
// over the canonical JSON dump) so outputs can be traced to their inputs.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cvarsaa/experiment.hpp"
#include "cvarsaa/gaussian_oracle.hpp"
#include "cvarsaa/market_models.hpp"
#include "cvarsaa/saa_solver.hpp"

namespace cvarsaa::io {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunSettings {
  Eigen::Index n = 0;
  Eigen::Index k = 0;
  std::vector<Eigen::Index> n_grid;
  std::uint64_t seed = 1;
  std::string solver = "cutting_plane";
  double tolerance = 1e-8;
  std::string out_dir = ".";
};

struct RunConfig {
  ProblemSpec problem;
  std::optional<ProblemSpec> bounded_problem;  // same alpha/capital/loss, new box
  Market market;
  RunSettings run;
  std::string config_hash;
};

RunConfig parse_config(const nlohmann::json& root);
RunConfig load_config(const std::string& path);

// FNV-1a 64-bit hex digest of the canonical (sorted-key) JSON dump.
std::string hash_hex(const nlohmann::json& canonical);

nlohmann::json solution_to_json(const Solution& s, const std::string& config_hash,
                                std::uint64_t seed, Eigen::Index n);
Solution solution_from_json(const nlohmann::json& j);
nlohmann::json gaussian_to_json(const GaussianSolution& g, const std::string& config_hash);
nlohmann::json study_to_json(const ConvergenceStudy& st, const std::string& config_hash,
                             std::uint64_t base_seed);

void write_text(const std::string& path, const std::string& body);

void write_scenario_csv(const std::string& path, const ScenarioMatrix& scen,
                        const std::string& config_hash);
ScenarioMatrix load_scenario_csv(const std::string& path);

// Long format: n,stat,target,value with slope rows keyed by n == 0.
void write_report_csv(const std::string& path, const ConvergenceStudy& st,
                      const std::string& config_hash, std::uint64_t base_seed);
void write_histogram_csv(const std::string& path, const Eigen::VectorXd& samples,
                         const std::string& config_hash, std::uint64_t base_seed);

}  // namespace cvarsaa::io
