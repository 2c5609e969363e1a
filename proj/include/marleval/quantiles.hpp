#pragma once

#include <cstddef>
#include <span>

namespace marleval {

// Inverse CDF of the standard normal distribution (Wichura's AS 241,
// double-precision branch). `p` must lie strictly inside (0, 1).
double normalQuantile(double p);

// Inverse CDF of Student's t distribution with `dof` degrees of freedom,
// computed by bisection on the regularised incomplete beta function.
// `p` strictly inside (0, 1), `dof` >= 1.
double studentTQuantile(double p, double dof);

// Regularised incomplete beta function I_x(a, b) via the standard continued
// fraction (Lentz's algorithm). Exposed because the t quantile needs it and
// tests pin it against known values.
double incompleteBeta(double a, double b, double x);

// Percentile of an ascending-sorted sample with linear interpolation between
// order statistics: position q * (n - 1). `q` in [0, 1], sample non-empty.
double percentileSorted(std::span<const double> sorted_ascending, double q);

}  // namespace marleval
