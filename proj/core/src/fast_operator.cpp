#include "fraclap/fast_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "fraclap/errors.hpp"
#include "fraclap/special.hpp"

namespace fraclap {

namespace {

constexpr double kAlphaOneTol = 1e-12;
constexpr double kDeadExponent = 50.0;  // lambda*h beyond this: omega := 0
constexpr int kAuditCap = 4096;

double interior(std::span<const double> v, int k, int n) {
    // Node index k in [0, N]; boundary values vanish.
    if (k <= 0 || k >= n) {
        return 0.0;
    }
    return v[static_cast<size_t>(k - 1)];
}

}  // namespace

AlphaRegime alpha_regime(double alpha) {
    if (std::abs(alpha - 1.0) < kAlphaOneTol) {
        return AlphaRegime::one;
    }
    return alpha < 1.0 ? AlphaRegime::sub : AlphaRegime::super;
}

double normalization_constant(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw validation_error("operator: alpha must lie in (0, 2)");
    }
    const double sqrt_pi = 1.7724538509055160273;
    return alpha * std::exp2(alpha - 1.0) * gamma_fn(0.5 * (1.0 + alpha)) /
           (sqrt_pi * gamma_fn(1.0 - 0.5 * alpha));
}

namespace coeff {

double omega_of(double lambda, double h) {
    const double x = lambda * h;
    if (x > kDeadExponent) {
        return 0.0;
    }
    return std::exp(-x);
}

double mu_side(double omega_i, double lambda, double h_prev) {
    return omega_i * (h_prev * exp_ratio_g1(lambda * h_prev));
}

double nu_side(double omega_i, double lambda, double h_prev) {
    return omega_i * (h_prev * exp_ratio_g2(lambda * h_prev));
}

double mu_tilde_side(double omega_i, double lambda, double h_prev) {
    return omega_i * exp_ratio_g3(lambda * h_prev);
}

}  // namespace coeff

CoefficientTables precompute_coefficients(const GradedMesh& mesh,
                                          const SoeApproximation& soe, double alpha,
                                          size_t table_budget_bytes) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw validation_error("operator: alpha must lie in (0, 2)");
    }
    const AlphaRegime regime = alpha_regime(alpha);
    const double expected_beta =
        (regime == AlphaRegime::sub) ? 1.0 + alpha : alpha;
    if (std::abs(soe.beta - expected_beta) > 1e-9) {
        throw validation_error("operator: soe kernel exponent does not match the regime");
    }
    const double span = mesh.b() - mesh.a();
    if (soe.delta_x > mesh.h_min() * (1.0 + 1e-9) || soe.X < span * (1.0 - 1e-9)) {
        throw validation_error("operator: soe window does not cover [h_min, b-a]");
    }

    CoefficientTables t;
    t.regime = regime;
    t.n = mesh.n();
    t.ne = soe.size();

    const size_t tables = (regime == AlphaRegime::sub) ? 5 : 3;
    const size_t cells = (static_cast<size_t>(t.n) + 1) * static_cast<size_t>(t.ne);
    t.materialized = tables * cells * sizeof(double) <= table_budget_bytes;
    if (!t.materialized) {
        return t;
    }

    const int n = t.n;
    const int ne = t.ne;
    t.omega.assign(cells, 0.0);
    t.mu_l.assign(cells, 0.0);
    t.mu_r.assign(cells, 0.0);
    if (regime == AlphaRegime::sub) {
        t.nu_l.assign(cells, 0.0);
        t.nu_r.assign(cells, 0.0);
    }

    for (int i = 1; i <= n; ++i) {
        const double h_i = mesh.step(i);
        double* om = &t.omega[static_cast<size_t>(i) * ne];
        for (int s = 0; s < ne; ++s) {
            om[s] = coeff::omega_of(soe.exponents[static_cast<size_t>(s)], h_i);
        }
    }
    for (int i = 2; i <= n - 1; ++i) {
        const double h_prev = mesh.step(i - 1);
        const double* om = &t.omega[static_cast<size_t>(i) * ne];
        double* ml = &t.mu_l[static_cast<size_t>(i) * ne];
        double* nl = regime == AlphaRegime::sub ? &t.nu_l[static_cast<size_t>(i) * ne] : nullptr;
        for (int s = 0; s < ne; ++s) {
            if (om[s] == 0.0) {
                continue;
            }
            const double lambda = soe.exponents[static_cast<size_t>(s)];
            if (regime == AlphaRegime::sub) {
                ml[s] = coeff::mu_side(om[s], lambda, h_prev);
                nl[s] = coeff::nu_side(om[s], lambda, h_prev);
            } else {
                ml[s] = coeff::mu_tilde_side(om[s], lambda, h_prev);
            }
        }
    }
    for (int i = 1; i <= n - 2; ++i) {
        const double h_next = mesh.step(i + 2);
        const double* om = &t.omega[static_cast<size_t>(i + 1) * ne];
        double* mr = &t.mu_r[static_cast<size_t>(i) * ne];
        double* nr = regime == AlphaRegime::sub ? &t.nu_r[static_cast<size_t>(i) * ne] : nullptr;
        for (int s = 0; s < ne; ++s) {
            if (om[s] == 0.0) {
                continue;
            }
            const double lambda = soe.exponents[static_cast<size_t>(s)];
            if (regime == AlphaRegime::sub) {
                mr[s] = coeff::mu_side(om[s], lambda, h_next);
                nr[s] = coeff::nu_side(om[s], lambda, h_next);
            } else {
                mr[s] = coeff::mu_tilde_side(om[s], lambda, h_next);
            }
        }
    }
    return t;
}

FastOperator::FastOperator(GradedMesh mesh, double alpha, Scheme scheme,
                           SoeApproximation soe, size_t table_budget_bytes)
    : mesh_(std::move(mesh)),
      alpha_(alpha),
      scheme_(scheme),
      regime_(alpha_regime(alpha)),
      c_alpha_(normalization_constant(alpha)),
      soe_(std::move(soe)),
      coeffs_(precompute_coefficients(mesh_, soe_, alpha, table_budget_bytes)) {
    const int n = mesh_.n();
    h_pow_.assign(static_cast<size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n; ++i) {
        h_pow_[static_cast<size_t>(i)] = std::pow(mesh_.step(i), -alpha_);
    }
    if (regime_ == AlphaRegime::one) {
        log_h_.assign(static_cast<size_t>(n) + 1, 0.0);
        for (int i = 1; i <= n; ++i) {
            log_h_[static_cast<size_t>(i)] = std::log(mesh_.step(i)) / mesh_.step(i);
        }
    }
    eta_.assign(static_cast<size_t>(n), 0.0);
    for (int i = 1; i <= n - 1; ++i) {
        const double h_i = mesh_.step(i);
        const double h_n = mesh_.step(i + 1);
        if (regime_ == AlphaRegime::one) {
            eta_[static_cast<size_t>(i)] = std::log1p((h_i - h_n) / h_n);
        } else {
            eta_[static_cast<size_t>(i)] =
                (std::pow(h_i, 1.0 - alpha_) - std::pow(h_n, 1.0 - alpha_)) / (1.0 - alpha_);
        }
    }
}

void FastOperator::local_into(std::span<const double> v, std::span<double> out) const {
    const int n = mesh_.n();
    if (scheme_ == Scheme::modified) {
        for (int i = 1; i <= n - 1; ++i) {
            const double h_i = mesh_.step(i);
            const double h_n = mesh_.step(i + 1);
            const double slope = -h_n / (h_i * (h_i + h_n)) * interior(v, i - 1, n) +
                                 (h_n - h_i) / (h_i * h_n) * interior(v, i, n) +
                                 h_i / (h_n * (h_i + h_n)) * interior(v, i + 1, n);
            out[static_cast<size_t>(i - 1)] = slope * eta_[static_cast<size_t>(i)];
        }
        return;
    }
    if (regime_ == AlphaRegime::one) {
        for (int i = 1; i <= n - 1; ++i) {
            const double li = log_h_[static_cast<size_t>(i)];
            const double ln = log_h_[static_cast<size_t>(i + 1)];
            out[static_cast<size_t>(i - 1)] = -li * interior(v, i - 1, n) +
                                              (li + ln) * interior(v, i, n) -
                                              ln * interior(v, i + 1, n);
        }
        return;
    }
    const double inv = 1.0 / (1.0 - alpha_);
    for (int i = 1; i <= n - 1; ++i) {
        const double pi = h_pow_[static_cast<size_t>(i)];
        const double pn = h_pow_[static_cast<size_t>(i + 1)];
        out[static_cast<size_t>(i - 1)] =
            inv * (-pi * interior(v, i - 1, n) + (pi + pn) * interior(v, i, n) -
                   pn * interior(v, i + 1, n));
    }
}

namespace {

// Shared sweep bodies. Accumulate[i-1] += sign * sum_s theta_s S_{i,s};
// `collect` optionally captures the full recurrence matrix for the audits.
struct SweepAccum {
    std::span<double> acc;
    double sign = 1.0;
    SweepMatrix* collect = nullptr;
};

void run_sweep_left(const FastOperator& op, std::span<const double> v, SweepAccum ctx) {
    const auto& mesh = op.mesh();
    const auto& soe = op.soe();
    const auto& t = op.coefficients();
    const int n = mesh.n();
    const int ne = t.ne;
    const bool sub = t.regime == AlphaRegime::sub;
    std::vector<double> state(static_cast<size_t>(ne), 0.0);

    for (int i = 2; i <= n - 1; ++i) {
        const double v1 = interior(v, i - 1, n);
        const double v2 = interior(v, i - 2, n);
        const double dv = v1 - v2;
        double dot = 0.0;
        if (t.materialized) {
            const double* om = &t.omega[static_cast<size_t>(i) * ne];
            const double* ml = &t.mu_l[static_cast<size_t>(i) * ne];
            const double* nl = sub ? &t.nu_l[static_cast<size_t>(i) * ne] : nullptr;
            if (sub) {
                for (int s = 0; s < ne; ++s) {
                    const double s_new = om[s] * state[static_cast<size_t>(s)] +
                                         ml[s] * v1 + nl[s] * v2;
                    state[static_cast<size_t>(s)] = s_new;
                    dot += soe.weights[static_cast<size_t>(s)] * s_new;
                }
            } else {
                for (int s = 0; s < ne; ++s) {
                    const double s_new =
                        om[s] * state[static_cast<size_t>(s)] + ml[s] * dv;
                    state[static_cast<size_t>(s)] = s_new;
                    dot += soe.weights[static_cast<size_t>(s)] * s_new;
                }
            }
        } else {
            const double h_i = mesh.step(i);
            const double h_prev = mesh.step(i - 1);
            for (int s = 0; s < ne; ++s) {
                const double lambda = soe.exponents[static_cast<size_t>(s)];
                const double om = coeff::omega_of(lambda, h_i);
                double s_new = 0.0;
                if (om != 0.0) {
                    if (sub) {
                        s_new = om * state[static_cast<size_t>(s)] +
                                coeff::mu_side(om, lambda, h_prev) * v1 +
                                coeff::nu_side(om, lambda, h_prev) * v2;
                    } else {
                        s_new = om * state[static_cast<size_t>(s)] +
                                coeff::mu_tilde_side(om, lambda, h_prev) * dv;
                    }
                }
                state[static_cast<size_t>(s)] = s_new;
                dot += soe.weights[static_cast<size_t>(s)] * s_new;
            }
        }
        if (!ctx.acc.empty()) {
            ctx.acc[static_cast<size_t>(i - 1)] += ctx.sign * dot;
        }
        if (ctx.collect != nullptr) {
            for (int s = 0; s < ne; ++s) {
                ctx.collect->data[static_cast<size_t>(i) * ne + s] =
                    state[static_cast<size_t>(s)];
            }
        }
    }
}

void run_sweep_right(const FastOperator& op, std::span<const double> v, SweepAccum ctx) {
    const auto& mesh = op.mesh();
    const auto& soe = op.soe();
    const auto& t = op.coefficients();
    const int n = mesh.n();
    const int ne = t.ne;
    const bool sub = t.regime == AlphaRegime::sub;
    std::vector<double> state(static_cast<size_t>(ne), 0.0);

    for (int i = n - 2; i >= 1; --i) {
        const double v1 = interior(v, i + 1, n);
        const double v2 = interior(v, i + 2, n);
        const double dv = v1 - v2;
        double dot = 0.0;
        if (t.materialized) {
            const double* om = &t.omega[static_cast<size_t>(i + 1) * ne];
            const double* mr = &t.mu_r[static_cast<size_t>(i) * ne];
            const double* nr = sub ? &t.nu_r[static_cast<size_t>(i) * ne] : nullptr;
            if (sub) {
                for (int s = 0; s < ne; ++s) {
                    const double s_new = om[s] * state[static_cast<size_t>(s)] +
                                         mr[s] * v1 + nr[s] * v2;
                    state[static_cast<size_t>(s)] = s_new;
                    dot += soe.weights[static_cast<size_t>(s)] * s_new;
                }
            } else {
                for (int s = 0; s < ne; ++s) {
                    const double s_new =
                        om[s] * state[static_cast<size_t>(s)] + mr[s] * dv;
                    state[static_cast<size_t>(s)] = s_new;
                    dot += soe.weights[static_cast<size_t>(s)] * s_new;
                }
            }
        } else {
            const double h_i1 = mesh.step(i + 1);
            const double h_next = mesh.step(i + 2);
            for (int s = 0; s < ne; ++s) {
                const double lambda = soe.exponents[static_cast<size_t>(s)];
                const double om = coeff::omega_of(lambda, h_i1);
                double s_new = 0.0;
                if (om != 0.0) {
                    if (sub) {
                        s_new = om * state[static_cast<size_t>(s)] +
                                coeff::mu_side(om, lambda, h_next) * v1 +
                                coeff::nu_side(om, lambda, h_next) * v2;
                    } else {
                        s_new = om * state[static_cast<size_t>(s)] +
                                coeff::mu_tilde_side(om, lambda, h_next) * dv;
                    }
                }
                state[static_cast<size_t>(s)] = s_new;
                dot += soe.weights[static_cast<size_t>(s)] * s_new;
            }
        }
        if (!ctx.acc.empty()) {
            ctx.acc[static_cast<size_t>(i - 1)] += ctx.sign * dot;
        }
        if (ctx.collect != nullptr) {
            for (int s = 0; s < ne; ++s) {
                ctx.collect->data[static_cast<size_t>(i) * ne + s] =
                    state[static_cast<size_t>(s)];
            }
        }
    }
}

}  // namespace

void FastOperator::apply_unscaled(std::span<const double> v, std::span<double> out) const {
    const int n = mesh_.n();
    local_into(v, out);

    if (regime_ == AlphaRegime::sub) {
        for (int i = 1; i <= n - 1; ++i) {
            out[static_cast<size_t>(i - 1)] +=
                (h_pow_[static_cast<size_t>(i)] + h_pow_[static_cast<size_t>(i + 1)]) /
                alpha_ * interior(v, i, n);
        }
        run_sweep_left(*this, v, SweepAccum{out, -1.0, nullptr});
        run_sweep_right(*this, v, SweepAccum{out, -1.0, nullptr});
    } else {
        for (int i = 1; i <= n - 1; ++i) {
            const double vi = interior(v, i, n);
            out[static_cast<size_t>(i - 1)] +=
                (h_pow_[static_cast<size_t>(i)] * (vi - interior(v, i - 1, n)) +
                 h_pow_[static_cast<size_t>(i + 1)] * (vi - interior(v, i + 1, n))) /
                alpha_;
        }
        const double inv_alpha = 1.0 / alpha_;
        run_sweep_left(*this, v, SweepAccum{out, inv_alpha, nullptr});
        run_sweep_right(*this, v, SweepAccum{out, inv_alpha, nullptr});
    }
}

void FastOperator::apply(std::span<const double> v, std::span<double> out) const {
    apply_unscaled(v, out);
    for (double& x : out) {
        x *= c_alpha_;
    }
}

std::vector<double> FastOperator::apply(std::span<const double> v) const {
    std::vector<double> out(v.size(), 0.0);
    apply(v, out);
    return out;
}

SweepMatrix sweep_left(const FastOperator& op, std::span<const double> v) {
    SweepMatrix m;
    m.rows = op.mesh().n();
    m.ne = op.coefficients().ne;
    m.data.assign(static_cast<size_t>(m.rows) * static_cast<size_t>(m.ne), 0.0);
    run_sweep_left(op, v, SweepAccum{{}, 0.0, &m});
    return m;
}

SweepMatrix sweep_right(const FastOperator& op, std::span<const double> v) {
    SweepMatrix m;
    m.rows = op.mesh().n();
    m.ne = op.coefficients().ne;
    m.data.assign(static_cast<size_t>(m.rows) * static_cast<size_t>(m.ne), 0.0);
    run_sweep_right(op, v, SweepAccum{{}, 0.0, &m});
    return m;
}

std::vector<double> local_part_original(const FastOperator& op, std::span<const double> v) {
    std::vector<double> out(v.size(), 0.0);
    const int n = op.mesh().n();
    const double alpha = op.alpha();
    if (op.regime() == AlphaRegime::one) {
        for (int i = 1; i <= n - 1; ++i) {
            const double li = std::log(op.mesh().step(i)) / op.mesh().step(i);
            const double ln = std::log(op.mesh().step(i + 1)) / op.mesh().step(i + 1);
            out[static_cast<size_t>(i - 1)] = -li * interior(v, i - 1, n) +
                                              (li + ln) * interior(v, i, n) -
                                              ln * interior(v, i + 1, n);
        }
        return out;
    }
    const double inv = 1.0 / (1.0 - alpha);
    for (int i = 1; i <= n - 1; ++i) {
        const double pi = std::pow(op.mesh().step(i), -alpha);
        const double pn = std::pow(op.mesh().step(i + 1), -alpha);
        out[static_cast<size_t>(i - 1)] =
            inv * (-pi * interior(v, i - 1, n) + (pi + pn) * interior(v, i, n) -
                   pn * interior(v, i + 1, n));
    }
    return out;
}

std::vector<double> local_part_modified(const FastOperator& op, std::span<const double> v) {
    std::vector<double> out(v.size(), 0.0);
    const int n = op.mesh().n();
    for (int i = 1; i <= n - 1; ++i) {
        const double h_i = op.mesh().step(i);
        const double h_n = op.mesh().step(i + 1);
        const double slope = -h_n / (h_i * (h_i + h_n)) * interior(v, i - 1, n) +
                             (h_n - h_i) / (h_i * h_n) * interior(v, i, n) +
                             h_i / (h_n * (h_i + h_n)) * interior(v, i + 1, n);
        out[static_cast<size_t>(i - 1)] = slope * op.eta()[static_cast<size_t>(i)];
    }
    return out;
}

DirectMatrix assemble_direct_matrix(const GradedMesh& mesh, double alpha) {
    if (!(alpha > 0.0) || alpha >= 1.0 - kAlphaOneTol) {
        throw validation_error("operator: direct matrix requires alpha in (0, 1)");
    }
    const int n = mesh.n();
    DirectMatrix dm;
    dm.alpha = alpha;
    dm.entries = DenseMatrix(n - 1, n - 1);
    const double scale = 1.0 / (alpha * (1.0 - alpha));

    // |x_k - x_i| by summing steps away from i: no cancellation even where
    // strong grading collapses absolute node coordinates near b.
    const double s = 1.0 - alpha;
    std::vector<double> dist(static_cast<size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n - 1; ++i) {
        double acc = 0.0;
        for (int k = i - 1; k >= 0; --k) {
            acc += mesh.step(k + 1);
            dist[static_cast<size_t>(k)] = acc;
        }
        acc = 0.0;
        for (int k = i + 1; k <= n; ++k) {
            acc += mesh.step(k);
            dist[static_cast<size_t>(k)] = acc;
        }
        dist[static_cast<size_t>(i)] = 0.0;
        for (int j = 1; j <= n - 1; ++j) {
            if (j == i) {
                dm.entries(i - 1, j - 1) =
                    scale * (std::pow(mesh.step(i), -alpha) + std::pow(mesh.step(i + 1), -alpha));
            } else if (j > i) {
                dm.entries(i - 1, j - 1) =
                    scale * (power_gap_ratio(dist[static_cast<size_t>(j)], mesh.step(j + 1), s) -
                             power_gap_ratio(dist[static_cast<size_t>(j - 1)], mesh.step(j), s));
            } else {
                dm.entries(i - 1, j - 1) =
                    scale * (power_gap_ratio(dist[static_cast<size_t>(j)], mesh.step(j), s) -
                             power_gap_ratio(dist[static_cast<size_t>(j + 1)], mesh.step(j + 1), s));
            }
        }
    }
    return dm;
}

DenseMatrix materialize_fast_matrix(const FastOperator& op, MatrixScaling scaling) {
    const int n = op.mesh().n();
    if (n > kAuditCap) {
        throw validation_error("operator: materialization capped at N <= 4096");
    }
    const int m = n - 1;
    DenseMatrix out(m, m);
    std::vector<double> e(static_cast<size_t>(m), 0.0);
    std::vector<double> col(static_cast<size_t>(m), 0.0);
    for (int j = 0; j < m; ++j) {
        e[static_cast<size_t>(j)] = 1.0;
        if (scaling == MatrixScaling::scaled) {
            op.apply(e, col);
        } else {
            op.apply_unscaled(e, col);
        }
        for (int i = 0; i < m; ++i) {
            out(i, j) = col[static_cast<size_t>(i)];
        }
        e[static_cast<size_t>(j)] = 0.0;
    }
    return out;
}

AuditReport audit_solvability(const DenseMatrix& m, const GradedMesh& mesh,
                              double alpha, double eps) {
    AuditReport report;
    const int n = m.rows;
    report.diag_all_positive = true;
    report.offdiag_all_nonpositive = true;
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        double off_sum = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == i) {
                continue;
            }
            const double a = m(i, j);
            if (a > 0.0) {
                report.offdiag_all_nonpositive = false;
            }
            off_sum += std::abs(a);
        }
        if (!(m(i, i) > 0.0)) {
            report.diag_all_positive = false;
        }
        min_gap = std::min(min_gap, m(i, i) - off_sum);
    }
    report.min_row_gap = min_gap;

    if (alpha_regime(alpha) == AlphaRegime::sub) {
        const int nn = mesh.n();
        const double span = mesh.b() - mesh.a();
        const double scale = 1.0 / (alpha * (1.0 - alpha));
        report.xi.resize(static_cast<size_t>(nn - 1));
        double threshold = std::numeric_limits<double>::infinity();
        for (int i = 1; i <= nn - 1; ++i) {
            const double d_left = mesh.dist_left(i);
            const double d_right = mesh.dist_right(i);
            const double xi_i =
                scale * (power_gap_ratio(d_left - mesh.step(1), mesh.step(1), 1.0 - alpha) +
                         power_gap_ratio(d_right - mesh.step(nn), mesh.step(nn), 1.0 - alpha));
            report.xi[static_cast<size_t>(i - 1)] = xi_i;
            threshold = std::min(threshold, xi_i / span);
        }
        const DirectMatrix direct = assemble_direct_matrix(mesh, alpha);
        for (int i = 1; i <= nn - 1; ++i) {
            for (int j = 1; j <= nn - 1; ++j) {
                if (j == i) {
                    continue;
                }
                threshold = std::min(threshold,
                                     -2.0 * direct.entries(i - 1, j - 1) /
                                         (mesh.step(j) + mesh.step(j + 1)));
            }
        }
        report.eps_threshold = threshold;

        const double h_uniform = span / static_cast<double>(nn);
        if (mesh.h_max() - mesh.h_min() <= 1e-12 * h_uniform) {
            const double nd = static_cast<double>(nn);
            report.g_alpha = (2.0 * std::pow(nd - 2.0, 1.0 - alpha) -
                              std::pow(nd - 3.0, 1.0 - alpha) -
                              std::pow(nd - 1.0, 1.0 - alpha)) /
                             (alpha * (1.0 - alpha) * std::pow(h_uniform, 1.0 + alpha));
        }
    }

    report.pass = report.diag_all_positive && report.offdiag_all_nonpositive &&
                  report.min_row_gap > 0.0 &&
                  (!report.eps_threshold.has_value() || eps <= *report.eps_threshold);
    return report;
}

}  // namespace fraclap
