#pragma once

namespace fraclap {

// Gamma function via the Lanczos approximation (g = 7, 9 coefficients),
// evaluated in extended precision. Relative error stays below 1e-13 on the
// range (0, 3] used by the normalization constants and the closed-form
// reference solution.
double gamma_fn(double x);

// Exponential-moment ratios appearing in the recurrence coefficients.
// All three switch to a 4-term Taylor series for x < 1e-4; above that they
// use expm1-based forms, so the relative error stays near machine precision
// across the many decades that lambda*h spans. Require x >= 0.
double exp_ratio_g1(double x);  // (e^{-x} + x - 1) / x^2        -> 1/2 at 0
double exp_ratio_g2(double x);  // (1 - e^{-x}(1 + x)) / x^2     -> 1/2 at 0
double exp_ratio_g3(double x);  // (1 - e^{-x}) / x              -> 1   at 0

// ((near + gap)^s - near^s) / gap for near >= 0, gap > 0. The direct form
// cancels catastrophically when gap << near (strongly graded cells against
// order-one distances); this routes through expm1/log1p instead.
double power_gap_ratio(double near, double gap, double s);

}  // namespace fraclap
