#include "sra/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace sra::stats {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  }
  static const boost::math::normal_distribution<double> nd(0.0, 1.0);
  return boost::math::quantile(nd, p);
}

double chi2_cdf(double x, double df) {
  if (x <= 0.0) return 0.0;
  const boost::math::chi_squared_distribution<double> d(df);
  return boost::math::cdf(d, x);
}

SampleMoments moments(std::span<const double> x) {
  SampleMoments m;
  m.n = static_cast<long long>(x.size());
  if (m.n == 0) return m;
  double s = 0.0;
  for (double v : x) s += v;
  m.mean = s / static_cast<double>(m.n);
  double s2 = 0.0, s3 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    s2 += d * d;
    s3 += d * d * d;
  }
  if (m.n > 1) {
    m.var = s2 / static_cast<double>(m.n - 1);
    m.sd = std::sqrt(m.var);
    m.se_mean = m.sd / std::sqrt(static_cast<double>(m.n));
    const double m2 = s2 / static_cast<double>(m.n);
    const double m3 = s3 / static_cast<double>(m.n);
    m.skewness = (m2 > 0.0) ? m3 / std::pow(m2, 1.5) : 0.0;
  }
  return m;
}

double ks_distance(std::vector<double> x,
                   const std::function<double(double)>& cdf) {
  if (x.empty()) throw std::invalid_argument("ks_distance: empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    const double hi = (static_cast<double>(i) + 1.0) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double ks_distance_std_normal(std::vector<double> x) {
  return ks_distance(std::move(x), [](double t) { return normal_cdf(t); });
}

double one_sided_coverage(std::span<const double> x, double level) {
  if (x.empty()) return 0.0;
  const double z = normal_quantile(level);
  std::size_t cnt = 0;
  for (double v : x) {
    if (v <= z) ++cnt;
  }
  return static_cast<double>(cnt) / static_cast<double>(x.size());
}

double p_value_lower(std::span<const double> sample, double observed) {
  std::size_t cnt = 0;
  for (double v : sample) {
    if (v <= observed) ++cnt;
  }
  return (static_cast<double>(cnt) + 1.0) /
         (static_cast<double>(sample.size()) + 1.0);
}

double p_value_upper(std::span<const double> sample, double observed) {
  std::size_t cnt = 0;
  for (double v : sample) {
    if (v >= observed) ++cnt;
  }
  return (static_cast<double>(cnt) + 1.0) /
         (static_cast<double>(sample.size()) + 1.0);
}

}  // namespace sra::stats
