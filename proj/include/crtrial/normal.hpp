#pragma once

namespace crtrial {

// Standard normal distribution function.
double normal_cdf(double z);

// Standard normal quantile, Wichura's AS 241 (PPND16); relative accuracy
// about 1e-16. Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

// P(chi-square(1) > x) for x >= 0.
double chi_square1_upper_tail(double x);

}  // namespace crtrial
