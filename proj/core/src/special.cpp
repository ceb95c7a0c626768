#include "fraclap/special.hpp"

#include <cassert>
#include <cmath>

namespace fraclap {

namespace {

// Lanczos g = 7, n = 9 coefficient set.
constexpr long double kLanczosG = 7.0L;
constexpr long double kLanczosCoeff[9] = {
    0.99999999999980993L,
    676.5203681218851L,
    -1259.1392167224028L,
    771.32342877765313L,
    -176.61502916214059L,
    12.507343278686905L,
    -0.13857109526572012L,
    9.9843695780195716e-6L,
    1.5056327351493116e-7L,
};

long double lanczos_gamma(long double x) {
    if (x < 0.5L) {
        // Reflection keeps the series argument above 1/2.
        const long double pi = 3.141592653589793238462643383279502884L;
        return pi / (sinl(pi * x) * lanczos_gamma(1.0L - x));
    }
    x -= 1.0L;
    long double a = kLanczosCoeff[0];
    for (int i = 1; i < 9; ++i) {
        a += kLanczosCoeff[i] / (x + static_cast<long double>(i));
    }
    const long double t = x + kLanczosG + 0.5L;
    const long double sqrt_two_pi = 2.50662827463100050241576528481104525L;
    return sqrt_two_pi * powl(t, x + 0.5L) * expl(-t) * a;
}

}  // namespace

double gamma_fn(double x) {
    return static_cast<double>(lanczos_gamma(static_cast<long double>(x)));
}

double exp_ratio_g1(double x) {
    assert(x >= 0.0);
    if (x < 1e-4) {
        return 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
    }
    return (std::expm1(-x) + x) / (x * x);
}

double exp_ratio_g2(double x) {
    assert(x >= 0.0);
    if (x < 1e-4) {
        return 0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0;
    }
    return (-std::expm1(-x) - x * std::exp(-x)) / (x * x);
}

double exp_ratio_g3(double x) {
    assert(x >= 0.0);
    if (x == 0.0) {
        return 1.0;
    }
    return -std::expm1(-x) / x;
}

double power_gap_ratio(double near, double gap, double s) {
    assert(near >= 0.0 && gap > 0.0);
    if (near == 0.0) {
        return std::pow(gap, s) / gap;
    }
    const double r = gap / near;
    if (r > 0.5) {
        return (std::pow(near + gap, s) - std::pow(near, s)) / gap;
    }
    return std::pow(near, s) * std::expm1(s * std::log1p(r)) / gap;
}

}  // namespace fraclap
