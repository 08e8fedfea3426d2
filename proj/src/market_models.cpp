#include "cvarsaa/market_models.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <stdexcept>
#include <string>

#include "cvarsaa/rng.hpp"
#include "cvarsaa/stats.hpp"

namespace cvarsaa {

// ---------------------------------------------------------------- marginals

MarginalSpec MarginalSpec::make_gaussian(double mu, double sigma) {
  MarginalSpec s;
  s.family = MarginalFamily::gaussian;
  s.mu = mu;
  s.sigma = sigma;
  s.validate();
  return s;
}

MarginalSpec MarginalSpec::make_gpd(double xi, double beta) {
  MarginalSpec s;
  s.family = MarginalFamily::generalized_pareto;
  s.xi = xi;
  s.beta = beta;
  s.validate();
  return s;
}

MarginalSpec MarginalSpec::make_lognormal(double mu_log, double sigma_log) {
  MarginalSpec s;
  s.family = MarginalFamily::lognormal;
  s.mu_log = mu_log;
  s.sigma_log = sigma_log;
  s.validate();
  return s;
}

void MarginalSpec::validate() const {
  switch (family) {
    case MarginalFamily::gaussian:
      if (!(sigma > 0.0))
        throw std::invalid_argument("marginal parameter domain: gaussian sigma must be > 0");
      break;
    case MarginalFamily::generalized_pareto:
      if (!(beta > 0.0))
        throw std::invalid_argument("marginal parameter domain: gpd beta must be > 0");
      if (!(xi < 0.5))
        throw std::invalid_argument(
            "marginal parameter domain: gpd xi must be < 0.5 (finite variance)");
      break;
    case MarginalFamily::lognormal:
      if (!(sigma_log > 0.0))
        throw std::invalid_argument(
            "marginal parameter domain: lognormal sigma_log must be > 0");
      break;
  }
}

double MarginalSpec::quantile(double u) const {
  switch (family) {
    case MarginalFamily::gaussian:
      return mu + sigma * stats::norm_quantile(u);
    case MarginalFamily::generalized_pareto:
      // CDF 1 - (1 + xi x / beta)^(-1/xi), location 0; xi -> 0 is exponential
      if (std::abs(xi) < 1e-12) return -beta * std::log1p(-u);
      return beta * (std::pow(1.0 - u, -xi) - 1.0) / xi;
    case MarginalFamily::lognormal:
      return std::exp(mu_log + sigma_log * stats::norm_quantile(u));
  }
  throw std::logic_error("unreachable marginal family");
}

double MarginalSpec::mean() const {
  switch (family) {
    case MarginalFamily::gaussian:
      return mu;
    case MarginalFamily::generalized_pareto:
      return beta / (1.0 - xi);
    case MarginalFamily::lognormal:
      return std::exp(mu_log + 0.5 * sigma_log * sigma_log);
  }
  throw std::logic_error("unreachable marginal family");
}

double MarginalSpec::stddev() const {
  switch (family) {
    case MarginalFamily::gaussian:
      return sigma;
    case MarginalFamily::generalized_pareto:
      return beta / ((1.0 - xi) * std::sqrt(1.0 - 2.0 * xi));
    case MarginalFamily::lognormal: {
      const double s2 = sigma_log * sigma_log;
      return std::sqrt((std::exp(s2) - 1.0)) * std::exp(mu_log + 0.5 * s2);
    }
  }
  throw std::logic_error("unreachable marginal family");
}

MarginalStats marginal_stats(const MarginalSpec& spec, double alpha) {
  spec.validate();
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("marginal_stats: alpha must lie in (0,1)");

  // Raw-law tail statistics first.
  double raw_var = 0.0, raw_cvar = 0.0;
  const double z = stats::norm_quantile(alpha);
  switch (spec.family) {
    case MarginalFamily::gaussian:
      raw_var = spec.mu + spec.sigma * z;
      raw_cvar = spec.mu + spec.sigma * stats::t_z(alpha);
      break;
    case MarginalFamily::generalized_pareto: {
      const double u = spec.quantile(alpha);
      raw_var = u;
      // E[X | X > u] = u + (beta + xi u)/(1 - xi) = (u + beta)/(1 - xi)
      raw_cvar = (u + spec.beta) / (1.0 - spec.xi);
      break;
    }
    case MarginalFamily::lognormal: {
      raw_var = std::exp(spec.mu_log + spec.sigma_log * z);
      raw_cvar = spec.mean() * stats::norm_cdf(spec.sigma_log - z) / (1.0 - alpha);
      break;
    }
  }

  // Loss after the unit-mean shift: -X = raw - E raw - 1; quantiles are
  // translation-equivariant.
  const double shift = spec.mean() + 1.0;
  MarginalStats out;
  out.mean = -1.0;
  out.stddev = spec.stddev();
  out.var_alpha = raw_var - shift;
  out.cvar_alpha = raw_cvar - shift;
  return out;
}

// --------------------------------------------------------------- dependence

DependenceSpec DependenceSpec::independent() { return DependenceSpec{}; }

DependenceSpec DependenceSpec::gaussian_copula(Eigen::MatrixXd correlation) {
  DependenceSpec d;
  d.kind = DependenceKind::gaussian_copula;
  d.correlation = std::move(correlation);
  return d;
}

DependenceSpec DependenceSpec::clayton(double theta) {
  DependenceSpec d;
  d.kind = DependenceKind::clayton;
  d.theta = theta;
  return d;
}

void DependenceSpec::validate(Eigen::Index d) const {
  switch (kind) {
    case DependenceKind::independent:
      return;
    case DependenceKind::gaussian_copula: {
      if (correlation.rows() != d || correlation.cols() != d)
        throw std::invalid_argument("dependence dimension mismatch: correlation matrix is " +
                                    std::to_string(correlation.rows()) + "x" +
                                    std::to_string(correlation.cols()) + ", need " +
                                    std::to_string(d) + "x" + std::to_string(d));
      if (!correlation.isApprox(correlation.transpose(), 1e-12))
        throw std::invalid_argument("copula correlation matrix must be symmetric");
      for (Eigen::Index i = 0; i < d; ++i)
        if (std::abs(correlation(i, i) - 1.0) > 1e-12)
          throw std::invalid_argument("copula correlation matrix must have unit diagonal");
      if (Eigen::LLT<Eigen::MatrixXd>(correlation).info() != Eigen::Success)
        throw std::invalid_argument("copula correlation matrix must be positive definite");
      return;
    }
    case DependenceKind::clayton:
      if (!(theta > 0.0))
        throw std::invalid_argument("clayton theta must be > 0");
      return;
  }
}

// ---------------------------------------------------------------- scenarios

ScenarioMatrix make_scenarios(Eigen::MatrixXd data, std::uint64_t seed) {
  ScenarioMatrix s;
  s.column_means = data.colwise().mean();
  s.data = std::move(data);
  s.seed = seed;
  return s;
}

GaussianModel GaussianModel::unit_mean(Eigen::MatrixXd sigma) {
  GaussianModel m;
  m.mean = Eigen::VectorXd::Ones(sigma.rows());
  m.sigma = std::move(sigma);
  m.validate();
  return m;
}

void GaussianModel::validate() const {
  if (mean.size() == 0 || sigma.rows() != mean.size() || sigma.cols() != mean.size())
    throw std::invalid_argument("gaussian model dimension mismatch");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw std::invalid_argument("covariance must be symmetric");
}

namespace {

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error(what);
  return llt.matrixL();
}

// N x d matrix of standard normals, column j from stream j.
Eigen::MatrixXd latent_normals(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Eigen::MatrixXd z(n, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    rng::Stream stream(seed, std::uint64_t(j));
    for (Eigen::Index i = 0; i < n; ++i) z(i, j) = stream.normal();
  }
  return z;
}

}  // namespace

ScenarioMatrix sample_gaussian(const GaussianModel& model, Eigen::Index n,
                               std::uint64_t seed) {
  model.validate();
  if (n < 1) throw std::invalid_argument("sample_gaussian: n must be >= 1");
  const Eigen::MatrixXd l = cholesky_lower(model.sigma, "covariance not SPD");
  Eigen::MatrixXd data = latent_normals(n, model.dim(), seed) * l.transpose();
  data.rowwise() += model.mean.transpose();
  return make_scenarios(std::move(data), seed);
}

Eigen::VectorXd sample_marginal(const MarginalSpec& spec, Eigen::Index n,
                                std::uint64_t seed) {
  spec.validate();
  if (n < 1) throw std::invalid_argument("sample_marginal: n must be >= 1");
  rng::Stream stream(seed, 0);
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = spec.quantile(stream.uniform());
  return out;
}

ScenarioMatrix sample_joint(const std::vector<MarginalSpec>& marginals,
                            const DependenceSpec& dep, Eigen::Index n,
                            std::uint64_t seed) {
  const Eigen::Index d = Eigen::Index(marginals.size());
  if (d == 0) throw std::invalid_argument("sample_joint: no marginals");
  if (n < 1) throw std::invalid_argument("sample_joint: n must be >= 1");
  for (const auto& m : marginals) m.validate();
  dep.validate(d);

  // Uniforms with the requested dependence, column j driven by stream j.
  Eigen::MatrixXd u(n, d);
  switch (dep.kind) {
    case DependenceKind::independent: {
      for (Eigen::Index j = 0; j < d; ++j) {
        rng::Stream stream(seed, std::uint64_t(j));
        for (Eigen::Index i = 0; i < n; ++i) u(i, j) = stream.uniform();
      }
      break;
    }
    case DependenceKind::gaussian_copula: {
      const Eigen::MatrixXd l =
          cholesky_lower(dep.correlation, "copula correlation not SPD");
      const Eigen::MatrixXd w = latent_normals(n, d, seed) * l.transpose();
      u = w.unaryExpr([](double x) { return stats::norm_cdf(x); });
      break;
    }
    case DependenceKind::clayton: {
      // Marshall-Olkin: S ~ Gamma(1/theta), E_ij Exp(1) i.i.d.,
      // U_ij = (1 + E_ij / S_i)^(-1/theta).
      rng::Stream frailty(seed, rng::kAuxStreamBase);
      Eigen::VectorXd s(n);
      for (Eigen::Index i = 0; i < n; ++i) s[i] = frailty.gamma(1.0 / dep.theta);
      for (Eigen::Index j = 0; j < d; ++j) {
        rng::Stream stream(seed, std::uint64_t(j));
        for (Eigen::Index i = 0; i < n; ++i)
          u(i, j) = std::pow(1.0 + stream.exponential() / s[i], -1.0 / dep.theta);
      }
      break;
    }
  }

  Eigen::MatrixXd data(n, d);
  for (Eigen::Index j = 0; j < d; ++j)
    data.col(j) = u.col(j).unaryExpr(
        [&marginals, j](double p) { return marginals[std::size_t(j)].quantile(p); });
  return make_scenarios(std::move(data), seed);
}

ScenarioMatrix standardize_to_unit_mean(const ScenarioMatrix& raw,
                                        const Eigen::VectorXd& analytic_means) {
  if (analytic_means.size() != raw.dim())
    throw std::invalid_argument("standardize_to_unit_mean: means dimension mismatch");
  if (!analytic_means.allFinite())
    throw std::invalid_argument("standardize_to_unit_mean: means must be finite");
  Eigen::MatrixXd data =
      (-raw.data).rowwise() + (analytic_means.array() + 1.0).matrix().transpose();
  return make_scenarios(std::move(data), raw.seed);
}

// ------------------------------------------------------------------ market

Market Market::gaussian(GaussianModel model) {
  Market m;
  m.is_gaussian = true;
  m.model = std::move(model);
  m.validate();
  return m;
}

Market Market::multi_law(std::vector<MarginalSpec> marginals, DependenceSpec dep) {
  Market m;
  m.is_gaussian = false;
  m.marginals = std::move(marginals);
  m.dependence = std::move(dep);
  m.validate();
  return m;
}

Eigen::Index Market::dim() const {
  return is_gaussian ? model.dim() : Eigen::Index(marginals.size());
}

void Market::validate() const {
  if (is_gaussian) {
    model.validate();
  } else {
    if (marginals.empty()) throw std::invalid_argument("multi-law market: no marginals");
    for (const auto& m : marginals) m.validate();
    dependence.validate(dim());
  }
}

ScenarioMatrix sample_market(const Market& market, Eigen::Index n, std::uint64_t seed) {
  market.validate();
  if (market.is_gaussian) return sample_gaussian(market.model, n, seed);
  const ScenarioMatrix raw = sample_joint(market.marginals, market.dependence, n, seed);
  Eigen::VectorXd means(market.dim());
  for (Eigen::Index j = 0; j < market.dim(); ++j)
    means[j] = market.marginals[std::size_t(j)].mean();
  return standardize_to_unit_mean(raw, means);
}

}  // namespace cvarsaa
