#pragma once
// Scenario generation for the two market settings:
//   - gaussian: X ~ N(mean, Sigma) sampled via Cholesky;
//   - multi-law: one marginal per business line (gaussian, generalized
//     Pareto, lognormal) coupled by an independent / Gaussian-copula /
//     Clayton dependence on the uniform scale, then shifted to unit mean.
//
// All samplers are deterministic functions of (inputs, seed).

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace cvarsaa {

enum class MarginalFamily { gaussian, generalized_pareto, lognormal };

struct MarginalSpec {
  MarginalFamily family = MarginalFamily::gaussian;
  double mu = 0.0, sigma = 1.0;           // gaussian
  double xi = 0.0, beta = 1.0;            // generalized Pareto (location 0)
  double mu_log = 0.0, sigma_log = 1.0;   // lognormal

  static MarginalSpec make_gaussian(double mu, double sigma);
  static MarginalSpec make_gpd(double xi, double beta = 1.0);
  static MarginalSpec make_lognormal(double mu_log, double sigma_log);

  // Throws std::invalid_argument("marginal parameter domain: ...") on bad
  // parameters (sigma <= 0, beta <= 0, or gpd xi >= 0.5 — finite variance
  // is required).
  void validate() const;

  double quantile(double u) const;  // inverse CDF of the raw law
  double mean() const;              // analytic mean of the raw law
  double stddev() const;            // analytic std of the raw law
};

// Analytic standalone statistics of the loss -X after the unit-mean shift
// X = 1 - (raw - E raw), i.e. of raw - E raw - 1.
struct MarginalStats {
  double mean = 0.0;        // always -1 by construction
  double stddev = 0.0;
  double var_alpha = 0.0;   // VaR_alpha of the loss
  double cvar_alpha = 0.0;  // CVaR_alpha of the loss
};
MarginalStats marginal_stats(const MarginalSpec& spec, double alpha);

enum class DependenceKind { independent, gaussian_copula, clayton };

struct DependenceSpec {
  DependenceKind kind = DependenceKind::independent;
  Eigen::MatrixXd correlation;  // gaussian_copula: SPD, unit diagonal
  double theta = 0.0;           // clayton: > 0; Kendall tau = theta/(theta+2)

  static DependenceSpec independent();
  static DependenceSpec gaussian_copula(Eigen::MatrixXd correlation);
  static DependenceSpec clayton(double theta);

  void validate(Eigen::Index d) const;
};

struct ScenarioMatrix {
  Eigen::MatrixXd data;          // N x d, one scenario per row
  std::uint64_t seed = 0;
  Eigen::VectorXd column_means;  // empirical column means, cached

  Eigen::Index n() const { return data.rows(); }
  Eigen::Index dim() const { return data.cols(); }
};

ScenarioMatrix make_scenarios(Eigen::MatrixXd data, std::uint64_t seed);

struct GaussianModel {
  Eigen::VectorXd mean;   // the studied setting uses 1_d
  Eigen::MatrixXd sigma;  // SPD covariance

  static GaussianModel unit_mean(Eigen::MatrixXd sigma);
  Eigen::Index dim() const { return mean.size(); }
  void validate() const;
};

// Rows i.i.d. N(mean, Sigma). Throws "covariance not SPD" when the
// Cholesky factorization fails.
ScenarioMatrix sample_gaussian(const GaussianModel& model, Eigen::Index n,
                               std::uint64_t seed);

// i.i.d. draws of the raw (unshifted) marginal law by inverse CDF.
Eigen::VectorXd sample_marginal(const MarginalSpec& spec, Eigen::Index n,
                                std::uint64_t seed);

// Raw joint sample: column j follows marginals[j], dependence induced on
// the uniform scale. No unit-mean shift is applied here.
ScenarioMatrix sample_joint(const std::vector<MarginalSpec>& marginals,
                            const DependenceSpec& dep, Eigen::Index n,
                            std::uint64_t seed);

// Affine unit-mean shift: output column j = 1 - (raw_j - analytic_means[j]).
ScenarioMatrix standardize_to_unit_mean(const ScenarioMatrix& raw,
                                        const Eigen::VectorXd& analytic_means);

// One market description = exactly one of the two settings.
struct Market {
  bool is_gaussian = true;
  GaussianModel model;                   // gaussian setting
  std::vector<MarginalSpec> marginals;   // multi-law setting
  DependenceSpec dependence;

  static Market gaussian(GaussianModel model);
  static Market multi_law(std::vector<MarginalSpec> marginals, DependenceSpec dep);
  Eigen::Index dim() const;
  void validate() const;
};

// Full sampling pipeline: gaussian -> sample_gaussian; multi-law ->
// sample_joint + unit-mean shift with the analytic marginal means.
ScenarioMatrix sample_market(const Market& market, Eigen::Index n,
                             std::uint64_t seed);

}  // namespace cvarsaa
