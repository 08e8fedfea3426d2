#pragma once
// Replicated SAA experiments: Monte Carlo replications of the solver on
// independently drawn scenario sets, n-grid convergence studies with
// log-log slope fits, normal fits of the scaled value error, and the
// dependence-sweep table (independent / gaussian copula / clayton).
//
// Replicate i always uses the scenario seed derive_seed(base_seed, i), so
// results are bit-identical for any worker count and invariant under
// permutation of the replicate index set.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cvarsaa/market_models.hpp"
#include "cvarsaa/saa_solver.hpp"

namespace cvarsaa {

struct ReplicationSet {
  Eigen::Index n = 0, k = 0;
  std::uint64_t base_seed = 0;
  Eigen::VectorXd values, zetas, lambdas;  // k entries, NaN where failed
  Eigen::MatrixXd gammas;                  // k x d
  std::vector<char> failed;                // failures are flagged, never dropped
  Eigen::Index failures() const;
};

// workers == 0: min(k, hardware threads, CVAR_SAA_THREADS if set).
ReplicationSet run_replications(const ProblemSpec& spec, const Market& market,
                                Eigen::Index n, Eigen::Index k,
                                std::uint64_t base_seed, int workers = 0);

struct BoxStats {
  double mean = 0.0, stddev = 0.0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double whisker_low = 0.0, whisker_high = 0.0;  // q1/q3 -/+ 1.5 IQR
};

BoxStats box_stats(const Eigen::VectorXd& samples);

struct NSummary {
  Eigen::Index n = 0;
  BoxStats value;
  std::vector<BoxStats> gamma;
  double oracle_distance = 0.0;  // ||mean gamma - gamma*||_inf; NaN without oracle
  Eigen::Index failures = 0;
};

struct NormalFit {
  double mu = 0.0, sigma = 0.0, ks = 0.0;
};

// Requires >= 30 samples; sigma is the unbiased sample std and ks the
// Kolmogorov-Smirnov distance to N(mu, sigma^2) (0 for a constant sample).
NormalFit normal_fit(const Eigen::VectorXd& samples);

struct ConvergenceStudy {
  std::vector<Eigen::Index> n_grid;
  std::vector<NSummary> summaries;
  double slope_value = 0.0;      // d log10 std(v_n) / d log10 n
  Eigen::VectorXd slope_gamma;   // per component
  bool degenerate = false;       // a zero sample std made a slope undefined
  bool has_oracle = false;
  double reference_value = 0.0;  // v* with an oracle, else mean at largest n
  NormalFit clt;                 // fit of sqrt(n) (v_i - reference) at largest n
  ReplicationSet largest;
};

ConvergenceStudy convergence_study(const ProblemSpec& spec, const Market& market,
                                   std::vector<Eigen::Index> n_grid, Eigen::Index k,
                                   std::uint64_t base_seed, int workers = 0);

struct MultiLawRow {
  std::string dependence;
  bool bounded = false;
  Solution solution;
};

// One row per dependence structure and box setting; the two box settings
// under one dependence share a single scenario draw.
std::vector<MultiLawRow> multi_law_table(
    const ProblemSpec& unbounded, const std::optional<ProblemSpec>& bounded,
    const std::vector<MarginalSpec>& marginals, const Eigen::MatrixXd& copula_correlation,
    double clayton_theta, Eigen::Index n, std::uint64_t seed);

}  // namespace cvarsaa
