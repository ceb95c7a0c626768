#include "fraclap/soe.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "fraclap/errors.hpp"

namespace fraclap {

namespace {

constexpr int kVerifyPoints = 10000;
constexpr int kPanelBudget = 80;          // |j| cap for dyadic panels [2^j, 2^{j+1}]
constexpr double kRelFloor = 8.0 * DBL_EPSILON;

// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on the Legendre
// recurrence in long double. Deterministic for a given q.
void gauss_legendre(int q, std::vector<long double>& nodes,
                    std::vector<long double>& weights) {
    nodes.assign(static_cast<size_t>(q), 0.0L);
    weights.assign(static_cast<size_t>(q), 0.0L);
    const long double pi = 3.141592653589793238462643383279502884L;
    for (int k = 0; k < (q + 1) / 2; ++k) {
        long double x = cosl(pi * (static_cast<long double>(k) + 0.75L) /
                             (static_cast<long double>(q) + 0.5L));
        long double dp = 0.0L;
        for (int iter = 0; iter < 100; ++iter) {
            long double p0 = 1.0L, p1 = x;
            for (int m = 2; m <= q; ++m) {
                const long double p2 =
                    ((2.0L * m - 1.0L) * x * p1 - (m - 1.0L) * p0) / static_cast<long double>(m);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<long double>(q) * (x * p1 - p0) / (x * x - 1.0L);
            const long double dx = p1 / dp;
            x -= dx;
            if (fabsl(dx) < 1e-19L * (1.0L + fabsl(x))) {
                break;
            }
        }
        const long double w = 2.0L / ((1.0L - x * x) * dp * dp);
        nodes[static_cast<size_t>(k)] = -x;
        weights[static_cast<size_t>(k)] = w;
        nodes[static_cast<size_t>(q - 1 - k)] = x;
        weights[static_cast<size_t>(q - 1 - k)] = w;
    }
}

struct VerifyOutcome {
    // Certified error: the plain error where an absolute eps is representable,
    // scaled down by eps/floor where it is not. Equals the absolute sup-error
    // on every window whose kernel values stay below eps/(8 DBL_EPSILON), and
    // stays <= eps exactly when the two-tier pass criterion holds.
    double certified;
    double worst_ratio;  // sup of err / max(eps, relfloor * kernel); pass iff <= 1
    double abs_sup;      // plain sup of abs error
};

VerifyOutcome scan_grid(const SoeApproximation& soe, int samples) {
    VerifyOutcome out{0.0, 0.0, 0.0};
    const long double lo = static_cast<long double>(soe.delta_x);
    const long double ratio = static_cast<long double>(soe.X) / lo;
    for (int k = 0; k < samples; ++k) {
        const long double frac =
            static_cast<long double>(k) / static_cast<long double>(samples - 1);
        const double x = static_cast<double>(lo * powl(ratio, frac));
        const long double kernel = powl(static_cast<long double>(x),
                                        -static_cast<long double>(soe.beta));
        long double sum = 0.0L;
        for (size_t s = 0; s < soe.exponents.size(); ++s) {
            sum += static_cast<long double>(soe.weights[s]) *
                   expl(-static_cast<long double>(soe.exponents[s]) *
                        static_cast<long double>(x));
        }
        const double err = static_cast<double>(fabsl(kernel - sum));
        const double floor_here = kRelFloor * static_cast<double>(kernel);
        out.abs_sup = std::max(out.abs_sup, err);
        out.certified =
            std::max(out.certified, err * std::min(1.0, soe.eps / floor_here));
        out.worst_ratio = std::max(out.worst_ratio, err / std::max(soe.eps, floor_here));
    }
    return out;
}

// Contribution of panel [T, 2T] to the Laplace integral at the worst point
// x = delta_x, bounded by T * max_t(t^{beta-1} e^{-delta_x t}) / Gamma(beta).
long double panel_tail_bound(long double t_lo, long double beta, long double delta_x,
                             long double inv_gamma_beta) {
    const long double t_hi = 2.0L * t_lo;
    const long double peak = (beta >= 1.0L) ? powl(t_hi, beta - 1.0L) : powl(t_lo, beta - 1.0L);
    return inv_gamma_beta * t_lo * peak * expl(-delta_x * t_lo);
}

}  // namespace

double SoeApproximation::eval(double x) const {
    if (!(x > 0.0)) {
        throw validation_error("soe: eval requires x > 0");
    }
    long double sum = 0.0L;
    for (size_t s = 0; s < exponents.size(); ++s) {
        sum += static_cast<long double>(weights[s]) *
               expl(-static_cast<long double>(exponents[s]) * static_cast<long double>(x));
    }
    return static_cast<double>(sum);
}

SoeApproximation build_soe(double beta, double eps, double delta_x, double X) {
    if (!(beta > 0.0 && beta < 2.0)) {
        throw validation_error("soe: beta must lie in (0, 2)");
    }
    if (!(eps > 0.0)) {
        throw validation_error("soe: eps must be positive");
    }
    if (!(delta_x > 0.0) || !(delta_x < X)) {
        throw validation_error("soe: invalid window, need 0 < delta_x < X");
    }

    const long double lbeta = static_cast<long double>(beta);
    const long double ldx = static_cast<long double>(delta_x);
    const long double leps = static_cast<long double>(eps);
    const long double gamma_beta = tgammal(lbeta);
    const long double inv_gamma_beta = 1.0L / gamma_beta;

    // Lower cutoff: int_0^{T0} t^{beta-1} dt / Gamma(beta) = T0^beta / Gamma(beta+1).
    const long double t0 = powl(leps / 8.0L * tgammal(lbeta + 1.0L), 1.0L / lbeta);
    const int j_min_needed = static_cast<int>(floorl(log2l(t0)));

    // Upper cutoff: first panel whose worst-case contribution is below eps/16
    // once the exponential decay dominates (successive panel bounds then fall
    // at least geometrically, so the whole tail stays below eps/8).
    int j_max_needed = kPanelBudget;
    {
        int j = std::max(j_min_needed, static_cast<int>(floorl(log2l(1.0L / ldx))) - 2);
        for (; j <= kPanelBudget; ++j) {
            const long double t_lo = powl(2.0L, static_cast<long double>(j));
            if (ldx * t_lo >= 2.0L * (lbeta + 2.0L) &&
                panel_tail_bound(t_lo, lbeta, ldx, inv_gamma_beta) <= leps / 16.0L) {
                j_max_needed = j;
                break;
            }
        }
    }

    double best_achieved = std::numeric_limits<double>::infinity();

    constexpr int kOrders[] = {12, 16, 20, 24, 32};
    for (int attempt = 0; attempt < 5; ++attempt) {
        const int q = kOrders[attempt];
        const int j_min = std::max(j_min_needed - attempt, -kPanelBudget);
        const int j_max = std::min(j_max_needed + attempt, kPanelBudget);

        std::vector<long double> gl_nodes, gl_weights;
        gauss_legendre(q, gl_nodes, gl_weights);

        std::vector<long double> lam, th;
        lam.reserve(static_cast<size_t>(j_max - j_min + 1) * static_cast<size_t>(q));
        th.reserve(lam.capacity());
        for (int j = j_min; j <= j_max; ++j) {
            const long double t_lo = powl(2.0L, static_cast<long double>(j));
            const long double t_hi = 2.0L * t_lo;
            const long double mid = 0.5L * (t_lo + t_hi);
            const long double hw = 0.5L * (t_hi - t_lo);
            for (int k = 0; k < q; ++k) {
                const long double t = mid + hw * gl_nodes[static_cast<size_t>(k)];
                lam.push_back(t);
                th.push_back(hw * gl_weights[static_cast<size_t>(k)] *
                             powl(t, lbeta - 1.0L) * inv_gamma_beta);
            }
        }

        // Trim both ends of the exponent ladder: each term's contribution on
        // the window is at most theta_s e^{-lambda_s delta_x}, so a prefix or
        // suffix whose cumulative bound stays below eps/16 can go.
        size_t lo = 0, hi = lam.size();
        {
            long double mass = 0.0L;
            while (lo < hi) {
                mass += th[lo] * expl(-lam[lo] * ldx);
                if (mass > leps / 16.0L) {
                    break;
                }
                ++lo;
            }
            mass = 0.0L;
            while (hi > lo) {
                mass += th[hi - 1] * expl(-lam[hi - 1] * ldx);
                if (mass > leps / 16.0L) {
                    break;
                }
                --hi;
            }
        }
        SoeApproximation soe;
        soe.beta = beta;
        soe.eps = eps;
        soe.delta_x = delta_x;
        soe.X = X;
        for (size_t s = lo; s < hi; ++s) {
            soe.exponents.push_back(static_cast<double>(lam[s]));
            soe.weights.push_back(static_cast<double>(th[s]));
        }
        if (soe.exponents.empty()) {
            continue;
        }

        const VerifyOutcome check = scan_grid(soe, kVerifyPoints);
        best_achieved = std::min(best_achieved, check.certified);
        if (check.worst_ratio <= 1.0) {
            soe.verified_error = check.certified;
            return soe;
        }
    }

    throw soe_build_error(
        "soe: tolerance unattainable within the panel budget (achieved " +
            std::to_string(best_achieved) + ", requested " + std::to_string(eps) + ")",
        best_achieved);
}

double verify_soe(SoeApproximation& soe, int samples) {
    if (samples < 2) {
        throw validation_error("soe: verification needs at least 2 samples");
    }
    const VerifyOutcome check = scan_grid(soe, samples);
    soe.verified_error = check.abs_sup;
    return check.abs_sup;
}

std::string soe_to_json(const SoeApproximation& soe) {
    nlohmann::json j;
    j["beta"] = soe.beta;
    j["eps"] = soe.eps;
    j["delta_x"] = soe.delta_x;
    j["X"] = soe.X;
    j["exponents"] = soe.exponents;
    j["weights"] = soe.weights;
    return j.dump();
}

SoeApproximation soe_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    SoeApproximation soe;
    soe.beta = j.at("beta").get<double>();
    soe.eps = j.at("eps").get<double>();
    soe.delta_x = j.at("delta_x").get<double>();
    soe.X = j.at("X").get<double>();
    soe.exponents = j.at("exponents").get<std::vector<double>>();
    soe.weights = j.at("weights").get<std::vector<double>>();
    if (soe.exponents.size() != soe.weights.size()) {
        throw validation_error("soe: exponent/weight length mismatch in JSON");
    }
    verify_soe(soe, kVerifyPoints);
    return soe;
}

}  // namespace fraclap
