#pragma once
// Scalar statistics kernels: standard-normal pdf/cdf/quantile, the normal
// tail-expectation factor t_z, hinge moments of a standard normal, and a
// one-sample Kolmogorov-Smirnov statistic.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace cvarsaa::stats {

inline double norm_pdf(double x) {
  return 0.39894228040143268 * std::exp(-0.5 * x * x);
}

inline double norm_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.70710678118654752);
}

// Wichura's PPND16 rational approximations: relative error below 1e-15
// on (0,1), including far tails.
inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("norm_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                 6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
               1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
             1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
           (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                 3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
               5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
             4.2313330701600911252e+1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

// t_z(alpha) = CVaR_alpha of a standard normal = phi(Phi^-1(alpha))/(1-alpha)
inline double t_z(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("t_z: alpha must lie in (0,1)");
  return norm_pdf(norm_quantile(alpha)) / (1.0 - alpha);
}

// Tail moments of Z ~ N(0,1) against the hinge (Z - a)^+:
//   hinge_mean (a)  = E (Z-a)^+            = phi(a) - a (1-Phi(a))
//   hinge_sq   (a)  = E [((Z-a)^+)^2]      = (1+a^2)(1-Phi(a)) - a phi(a)
//   hinge_cross(a)  = E [Z (Z-a)^+]        = 1 - Phi(a)
inline double hinge_mean(double a) {
  return norm_pdf(a) - a * (1.0 - norm_cdf(a));
}
inline double hinge_sq(double a) {
  return (1.0 + a * a) * (1.0 - norm_cdf(a)) - a * norm_pdf(a);
}
inline double hinge_cross(double a) { return 1.0 - norm_cdf(a); }

// sup_x |F_n(x) - F(x)| for the sample against a CDF functor; O(n log n).
template <class Cdf>
double ks_statistic(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = double(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::max(double(i + 1) / n - f, f - double(i) / n));
  }
  return d;
}

// Ordinary least squares slope of y against x.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ols_slope: need >= 2 paired points");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("ols_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / den;
}

// Quantile with linear interpolation between order statistics (type 7).
inline double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
  std::sort(v.begin(), v.end());
  const double h = p * double(v.size() - 1);
  const std::size_t lo = std::size_t(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

}  // namespace cvarsaa::stats
