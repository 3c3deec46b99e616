#pragma once

// Tail probabilities used by the path, claim and global tests.

namespace semsim::stats {

/// P(Z > z) for a standard normal.
double normal_upper(double z);

/// Two-sided p-value 2 * P(Z > |z|).
double normal_two_sided(double z);

/// Upper tail of a chi-square with `df` degrees of freedom; df = 0 is a point
/// mass at 0, so the tail is 1 for x <= 0 and 0 otherwise.
double chi2_upper(double x, double df);

/// Two-sided p-value of a Student t statistic.
double t_two_sided(double t, double df);

}  // namespace semsim::stats
