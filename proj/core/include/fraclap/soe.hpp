#pragma once

#include <string>
#include <vector>

namespace fraclap {

// Sum-of-exponentials compression of the kernel x^{-beta} on [delta_x, X]:
//
//   x^{-beta} ~= sum_s weights[s] * exp(-exponents[s] * x),
//
// with all exponents and weights strictly positive and exponents sorted
// ascending. Construction discretizes the Laplace representation
//
//   x^{-beta} = 1/Gamma(beta) * int_0^inf t^{beta-1} e^{-x t} dt
//
// by composite Gauss-Legendre quadrature on dyadic panels [2^j, 2^{j+1}].
// The panel range comes from tail bounds on (delta_x, X, eps), terms whose
// contribution on the window falls below the pruning budget are dropped, and
// the result is checked on a dense geometric grid before being returned.
//
// Where x^{-beta} itself exceeds eps/(8 * DBL_EPSILON), an absolute error of
// eps is smaller than a few ulps of the kernel value and cannot be certified
// in double precision. Such grid points are held to an 8-ulp relative bound
// instead, and verified_error reports the error with the floored points
// rescaled by eps/(8 DBL_EPSILON x^{-beta}); on every window whose kernel
// stays below the representability cap (all ordinary delta_x) it is just the
// absolute sup-error of the verification grid.
struct SoeApproximation {
    double beta = 0.0;
    double eps = 0.0;
    double delta_x = 0.0;
    double X = 0.0;
    std::vector<double> exponents;  // lambda_s, ascending, pairwise distinct
    std::vector<double> weights;    // theta_s
    double verified_error = 0.0;

    int size() const { return static_cast<int>(exponents.size()); }

    // sum_s theta_s e^{-lambda_s x}, accumulated in extended precision.
    // Requires x > 0.
    double eval(double x) const;
};

// Builds the compression, escalating quadrature order and panel margin until
// the verification grid passes. Throws validation_error on a bad window and
// soe_build_error (with the achieved error) when the budget is exhausted.
SoeApproximation build_soe(double beta, double eps, double delta_x, double X);

inline double eval_soe(const SoeApproximation& soe, double x) {
    return soe.eval(x);
}

// Max absolute error |x^{-beta} - eval| over a geometric grid of `samples`
// points in [delta_x, X], endpoints included. Updates soe.verified_error.
// Requires samples >= 2.
double verify_soe(SoeApproximation& soe, int samples);

// JSON serialization of (beta, eps, delta_x, X, exponents, weights) with
// exact decimal round-trip of all doubles. from-string re-verifies on the
// standard grid to repopulate verified_error.
std::string soe_to_json(const SoeApproximation& soe);
SoeApproximation soe_from_json(const std::string& text);

}  // namespace fraclap
