#pragma once

#include "skewlink/common.hpp"
#include "skewlink/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

// High-precision standard normal cdf, independent of the library path:
// Taylor series for the body, Lentz continued fraction for the tail, both
// in long double.
inline long double phi_oracle(double xd) {
  const long double x = xd;
  const long double z = std::fabs(x) / 1.41421356237309504880168872420969808L;
  long double upper_half;  // Phi(|x|)
  if (z < 3.0L) {
    long double term = z, sum = z;
    for (int n = 1; n < 300; ++n) {
      term *= -z * z / n;
      const long double add = term / (2 * n + 1);
      sum += add;
      if (std::fabs((double)add) < 1e-22) break;
    }
    const long double erf = sum * 2.0L / 1.77245385090551602729816748334114518L;
    upper_half = 0.5L * (1.0L + erf);
  } else {
    // erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + 2/(z + ...)))))
    long double cf = 0.0L;
    for (int k = 60; k >= 1; --k) cf = (k / 2.0L) / (z + cf);
    const long double erfc =
        std::exp(-z * z) / 1.77245385090551602729816748334114518L / (z + cf);
    upper_half = 1.0L - 0.5L * erfc;
  }
  return (x >= 0.0L) ? upper_half : 1.0L - upper_half;
}

inline double trapezoid(const std::function<double(double)>& f, double a, double b,
                        double step) {
  const long n = std::lround((b - a) / step);
  long double sum = 0.5L * (f(a) + f(b));
  for (long i = 1; i < n; ++i) sum += f(a + i * step);
  return static_cast<double>(sum * step);
}

// One-sample KS test against a cdf; true = consistent at the given level.
inline bool ks_one_sample(std::vector<double> draws,
                          const std::function<double(double)>& cdf,
                          double level = 0.01) {
  std::sort(draws.begin(), draws.end());
  const std::size_t n = draws.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(draws[i]);
    d = std::fmax(d, std::fmax(f - static_cast<double>(i) / n,
                               static_cast<double>(i + 1) / n - f));
  }
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  return d <= c / std::sqrt(static_cast<double>(n));
}

inline bool ks_two_sample(std::vector<double> a, std::vector<double> b,
                          double level = 0.01) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::fmax(d, std::fabs(static_cast<double>(i) / n -
                               static_cast<double>(j) / m));
  }
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  return d <= c * std::sqrt(static_cast<double>(n + m) /
                            (static_cast<double>(n) * static_cast<double>(m)));
}

// Chi-squared goodness of fit against bin probabilities; true = consistent.
inline bool chisq_gof(const std::vector<long>& observed,
                      const std::vector<double>& expected_prob, long total,
                      double level = 0.01) {
  double stat = 0.0;
  int dof = -1;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double e = expected_prob[k] * total;
    if (e < 5.0) continue;  // merged implicitly by skipping tiny bins
    stat += (observed[k] - e) * (observed[k] - e) / e;
    ++dof;
  }
  if (dof < 1) return true;
  return stat <= skewlink::chisq_quantile(1.0 - level, dof);
}

}  // namespace testutil
