#pragma once

#include <cstdint>
#include <vector>

namespace sweepsim::stats {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ95);

struct Summary {
  std::int64_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double standard_error = 0.0;
};

Summary summarize(const std::vector<double>& xs);

/// Linear-interpolation quantile (the "type 7" rule). Empty input throws.
double quantile(std::vector<double> xs, double q);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double iqr() const { return q3 - q1; }
};

Quartiles quartiles(std::vector<double> xs);

/// Half the L1 distance between two probability vectors (padded with zeros).
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample KS critical value at level `level` (e.g. 0.05).
double ks_critical_value(std::size_t n, std::size_t m, double level);

/// Pearson chi-square statistic of observed counts against probabilities.
double chi_square_statistic(const std::vector<std::int64_t>& observed,
                            const std::vector<double>& probabilities);

/// Upper quantile of the chi-square law with `dof` degrees of freedom
/// (Wilson-Hilferty approximation), e.g. level 0.01 for the 99% point.
double chi_square_critical_value(int dof, double level);

/// Standard normal quantile.
double normal_quantile(double p);

/// Spearman rank correlation between two equally long samples.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace sweepsim::stats
