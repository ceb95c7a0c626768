#include "fraclap/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstring>

#include "fraclap/errors.hpp"
#include "fraclap/special.hpp"

namespace fraclap {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (size_t k = 0; k < a.size(); ++k) {
        acc += a[k] * b[k];
    }
    return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// |x_hi - x_lo| as a sum of steps: immune to the loss of absolute node
// resolution near b on strongly graded meshes.
double node_gap(const GradedMesh& mesh, int lo, int hi) {
    double acc = 0.0;
    for (int k = lo + 1; k <= hi; ++k) {
        acc += mesh.step(k);
    }
    return acc;
}

// Antiderivative of t^{-alpha}: t^{1-alpha}/(1-alpha), or ln t at alpha = 1.
double kernel_primitive(double t, double alpha, bool log_branch) {
    if (log_branch) {
        return std::log(t);
    }
    return std::pow(t, 1.0 - alpha) / (1.0 - alpha);
}

}  // namespace

BandedPreconditioner::BandedPreconditioner(int n, int l, std::vector<double> band)
    : n_(n), l_(l), width_(2 * l - 1), band_(std::move(band)) {
    if (l_ < 1) {
        throw validation_error("preconditioner: l must be >= 1");
    }
    if (band_.size() != static_cast<size_t>(n_) * static_cast<size_t>(width_)) {
        throw validation_error("preconditioner: band storage has the wrong size");
    }
    factor();
}

BandedPreconditioner BandedPreconditioner::build(const GradedMesh& mesh, double alpha,
                                                 Scheme scheme, int l) {
    const int n = mesh.n();
    const int rows = n - 1;
    if (l < 1) {
        throw validation_error("preconditioner: l must be >= 1");
    }
    if (2 * l - 1 > rows) {
        throw validation_error("preconditioner: bandwidth 2l-1 exceeds the system size");
    }
    const double c_alpha = normalization_constant(alpha);
    const int width = 2 * l - 1;
    std::vector<double> band(static_cast<size_t>(rows) * static_cast<size_t>(width), 0.0);
    auto slot = [&](int i, int j) -> double& {
        // 1-based node/interval indices.
        return band[static_cast<size_t>(i - 1) * width + (j - i + l - 1)];
    };

    const AlphaRegime regime = alpha_regime(alpha);
    if (regime == AlphaRegime::sub) {
        const double scale = 1.0 / (alpha * (1.0 - alpha));
        const double s = 1.0 - alpha;
        for (int i = 1; i <= rows; ++i) {
            for (int j = std::max(1, i - l + 1); j <= std::min(rows, i + l - 1); ++j) {
                double a;
                if (j == i) {
                    a = scale * (std::pow(mesh.step(i), -alpha) +
                                 std::pow(mesh.step(i + 1), -alpha));
                } else if (j > i) {
                    a = scale * (power_gap_ratio(node_gap(mesh, i, j), mesh.step(j + 1), s) -
                                 power_gap_ratio(node_gap(mesh, i, j - 1), mesh.step(j), s));
                } else {
                    a = scale * (power_gap_ratio(node_gap(mesh, j, i), mesh.step(j), s) -
                                 power_gap_ratio(node_gap(mesh, j + 1, i), mesh.step(j + 1), s));
                }
                slot(i, j) = c_alpha * a;
            }
        }
        (void)scheme;
        return BandedPreconditioner(rows, l, std::move(band));
    }

    // alpha in [1,2): exact near-field entries of the modified scheme.
    const bool log_branch = (regime == AlphaRegime::one);
    auto seg = [&](double t_near, double t_far) {
        // int of t^{-alpha} over [t_near, t_far], 0 < t_near < t_far.
        return kernel_primitive(t_far, alpha, log_branch) -
               kernel_primitive(t_near, alpha, log_branch);
    };
    for (int i = 1; i <= rows; ++i) {
        const double h_i = mesh.step(i);
        const double h_n = mesh.step(i + 1);
        const double eta = log_branch
                               ? std::log1p((h_i - h_n) / h_n)
                               : (std::pow(h_i, 1.0 - alpha) - std::pow(h_n, 1.0 - alpha)) /
                                     (1.0 - alpha);
        slot(i, i) = c_alpha * ((std::pow(h_i, -alpha) + std::pow(h_n, -alpha)) / alpha +
                                (h_n - h_i) * eta / (h_i * h_n));
        for (int j = std::max(1, i - l + 1); j <= std::min(rows, i + l - 1); ++j) {
            if (j == i) {
                continue;
            }
            double a = 0.0;
            if (j == i - 1) {
                a = -std::pow(h_i, -alpha) / alpha - h_n * eta / (h_i * (h_i + h_n)) +
                    seg(node_gap(mesh, i - 1, i), node_gap(mesh, i - 2, i)) /
                        (alpha * mesh.step(i - 1));
            } else if (j == i + 1) {
                a = -std::pow(h_n, -alpha) / alpha + h_i * eta / ((h_i + h_n) * h_n) +
                    seg(node_gap(mesh, i, i + 1), node_gap(mesh, i, i + 2)) /
                        (alpha * mesh.step(i + 2));
            } else if (j < i) {
                a = (seg(node_gap(mesh, j, i), node_gap(mesh, j - 1, i)) / mesh.step(j) -
                     seg(node_gap(mesh, j + 1, i), node_gap(mesh, j, i)) / mesh.step(j + 1)) /
                    alpha;
            } else {
                a = (seg(node_gap(mesh, i, j), node_gap(mesh, i, j + 1)) / mesh.step(j + 1) -
                     seg(node_gap(mesh, i, j - 1), node_gap(mesh, i, j)) / mesh.step(j)) /
                    alpha;
            }
            slot(i, j) = c_alpha * a;
        }
    }
    return BandedPreconditioner(rows, l, std::move(band));
}

void BandedPreconditioner::factor() {
    // Strict diagonal dominance of the source band justifies skipping pivots.
    for (int i = 0; i < n_; ++i) {
        double off = 0.0;
        for (int d = 0; d < width_; ++d) {
            if (d != l_ - 1) {
                off += std::abs(band_[static_cast<size_t>(i) * width_ + d]);
            }
        }
        const double diag = std::abs(band_[static_cast<size_t>(i) * width_ + (l_ - 1)]);
        if (!(diag > off)) {
            throw solver_error(
                "preconditioner: band is not strictly diagonally dominant, refusing "
                "pivot-free factorization");
        }
    }

    lu_ = band_;
    auto at = [&](int i, int j) -> double& {
        return lu_[static_cast<size_t>(i) * width_ + (j - i + l_ - 1)];
    };
    for (int k = 0; k < n_; ++k) {
        const double pivot = at(k, k);
        if (pivot == 0.0) {
            throw solver_error("preconditioner: zero pivot in banded factorization");
        }
        for (int i = k + 1; i <= std::min(k + l_ - 1, n_ - 1); ++i) {
            const double m = at(i, k) / pivot;
            at(i, k) = m;
            for (int j = k + 1; j <= std::min(k + l_ - 1, n_ - 1); ++j) {
                at(i, j) -= m * at(k, j);
            }
        }
    }
}

void BandedPreconditioner::solve(std::span<const double> r, std::span<double> z) const {
    auto at = [&](int i, int j) -> double {
        return lu_[static_cast<size_t>(i) * width_ + (j - i + l_ - 1)];
    };
    for (int i = 0; i < n_; ++i) {
        double acc = r[static_cast<size_t>(i)];
        for (int k = std::max(0, i - l_ + 1); k < i; ++k) {
            acc -= at(i, k) * z[static_cast<size_t>(k)];
        }
        z[static_cast<size_t>(i)] = acc;
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double acc = z[static_cast<size_t>(i)];
        for (int j = i + 1; j <= std::min(i + l_ - 1, n_ - 1); ++j) {
            acc -= at(i, j) * z[static_cast<size_t>(j)];
        }
        const double pivot = at(i, i);
        if (pivot == 0.0) {
            throw solver_error("preconditioner: zero pivot in banded solve");
        }
        z[static_cast<size_t>(i)] = acc / pivot;
    }
}

std::vector<double> BandedPreconditioner::solve(std::span<const double> r) const {
    std::vector<double> z(r.size(), 0.0);
    solve(r, z);
    return z;
}

SolveReport bicgstab(const LinearMap& apply_a, std::span<const double> f,
                     std::span<const double> x0, double tol, int max_iter,
                     const BandedPreconditioner* precond) {
    if (!(tol > 0.0)) {
        throw validation_error("bicgstab: tol must be positive");
    }
    const auto t_start = std::chrono::steady_clock::now();
    const size_t n = f.size();

    SolveReport report;
    report.solution.assign(x0.begin(), x0.end());
    std::vector<double>& x = report.solution;

    std::vector<double> r(n, 0.0);
    bool x0_zero = true;
    for (double v : x) {
        if (v != 0.0) {
            x0_zero = false;
            break;
        }
    }
    if (x0_zero) {
        std::copy(f.begin(), f.end(), r.begin());
    } else {
        apply_a(x, r);
        for (size_t k = 0; k < n; ++k) {
            r[k] = f[k] - r[k];
        }
    }
    const double f_norm = norm2(f);
    const double denom = f_norm > 0.0 ? f_norm : 1.0;

    std::vector<double> rt(r);  // shadow residual, fixed to r0
    std::vector<double> p(n, 0.0), v(n, 0.0), phat(n, 0.0), shat(n, 0.0), s(n, 0.0),
        t(n, 0.0);
    double rho_prev = 1.0, alpha = 1.0, omega = 1.0;

    if (norm2(r) / denom > tol) {
        for (int iter = 1; iter <= max_iter; ++iter) {
            report.iterations = iter;
            const double rho = dot(rt, r);
            if (rho == 0.0) {
                report.breakdown = Breakdown::rho_zero;
                break;
            }
            if (iter == 1) {
                p = r;
            } else {
                const double beta = (rho / rho_prev) * (alpha / omega);
                for (size_t k = 0; k < n; ++k) {
                    p[k] = r[k] + beta * (p[k] - omega * v[k]);
                }
            }
            if (precond != nullptr) {
                precond->solve(p, phat);
            } else {
                phat = p;
            }
            apply_a(phat, v);
            const double rt_v = dot(rt, v);
            if (rt_v == 0.0) {
                // Same Lanczos-type failure as rho = 0.
                report.breakdown = Breakdown::rho_zero;
                break;
            }
            alpha = rho / rt_v;
            for (size_t k = 0; k < n; ++k) {
                s[k] = r[k] - alpha * v[k];
            }
            if (norm2(s) / denom <= tol) {
                for (size_t k = 0; k < n; ++k) {
                    x[k] += alpha * phat[k];
                }
                break;
            }
            if (precond != nullptr) {
                precond->solve(s, shat);
            } else {
                shat = s;
            }
            apply_a(shat, t);
            const double tt = dot(t, t);
            omega = tt > 0.0 ? dot(t, s) / tt : 0.0;
            for (size_t k = 0; k < n; ++k) {
                x[k] += alpha * phat[k] + omega * shat[k];
            }
            for (size_t k = 0; k < n; ++k) {
                r[k] = s[k] - omega * t[k];
            }
            if (norm2(r) / denom <= tol) {
                break;
            }
            if (omega == 0.0) {
                report.breakdown = Breakdown::omega_zero;
                break;
            }
            rho_prev = rho;
        }
    }

    // True residual of the returned iterate; no restarts.
    std::vector<double> r_true(n, 0.0);
    apply_a(x, r_true);
    for (size_t k = 0; k < n; ++k) {
        r_true[k] = f[k] - r_true[k];
    }
    report.relative_residual = norm2(r_true) / denom;
    report.converged = report.relative_residual <= tol;
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

std::vector<double> dense_gaussian_elimination(DenseMatrix a, std::vector<double> f) {
    const int n = a.rows;
    if (n != a.cols || static_cast<size_t>(n) != f.size()) {
        throw validation_error("dense solve: shape mismatch");
    }
    for (int k = 0; k < n; ++k) {
        int piv = k;
        double best = std::abs(a(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double cand = std::abs(a(i, k));
            if (cand > best) {
                best = cand;
                piv = i;
            }
        }
        if (best == 0.0) {
            throw solver_error("dense solve: matrix is singular to working precision");
        }
        if (piv != k) {
            for (int j = k; j < n; ++j) {
                std::swap(a(k, j), a(piv, j));
            }
            std::swap(f[static_cast<size_t>(k)], f[static_cast<size_t>(piv)]);
        }
        const double pivot = a(k, k);
        for (int i = k + 1; i < n; ++i) {
            const double m = a(i, k) / pivot;
            if (m == 0.0) {
                continue;
            }
            a(i, k) = 0.0;
            for (int j = k + 1; j < n; ++j) {
                a(i, j) -= m * a(k, j);
            }
            f[static_cast<size_t>(i)] -= m * f[static_cast<size_t>(k)];
        }
    }
    std::vector<double> x(static_cast<size_t>(n), 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double acc = f[static_cast<size_t>(i)];
        for (int j = i + 1; j < n; ++j) {
            acc -= a(i, j) * x[static_cast<size_t>(j)];
        }
        x[static_cast<size_t>(i)] = acc / a(i, i);
    }
    return x;
}

}  // namespace fraclap
