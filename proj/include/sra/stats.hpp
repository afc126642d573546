#pragma once

#include <functional>
#include <span>
#include <vector>

namespace sra::stats {

double normal_cdf(double x);
double normal_quantile(double p);
double chi2_cdf(double x, double df);

struct SampleMoments {
  long long n = 0;
  double mean = 0.0;
  double var = 0.0;   // unbiased
  double sd = 0.0;
  double se_mean = 0.0;
  double skewness = 0.0;  // g1, biased plug-in
};
SampleMoments moments(std::span<const double> x);

/// Kolmogorov-Smirnov distance between the empirical CDF of `x` and `cdf`.
double ks_distance(std::vector<double> x, const std::function<double(double)>& cdf);
double ks_distance_std_normal(std::vector<double> x);

/// Empirical coverage of the one-sided set {t <= z_level}.
double one_sided_coverage(std::span<const double> x, double level);

/// Tail p-value with the +1/(B+1) continuity convention.
double p_value_lower(std::span<const double> sample, double observed);
double p_value_upper(std::span<const double> sample, double observed);

}  // namespace sra::stats
