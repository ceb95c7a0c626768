#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fraclap/dense.hpp"
#include "fraclap/fast_operator.hpp"
#include "fraclap/mesh.hpp"

namespace fraclap {

// Central-band approximation of the stiffness matrix with bandwidth 2l-1,
// factored once by pivot-free banded LU. Strict diagonal dominance of the
// band is checked at build time; it is what justifies skipping pivoting.
class BandedPreconditioner {
public:
    // Band entries from the stiffness structure, scaled by C_alpha so the
    // preconditioner matches the scaled operator:
    //  - alpha in (0,1): central band of the direct-collocation matrix;
    //  - alpha in [1,2): exact (compression-free) near-field entries of the
    //    modified scheme, i.e. its local stencil plus closed-form kernel
    //    integrals over the first l-1 off-diagonals.
    // Requires l >= 1 and 2l-1 <= N-1.
    static BandedPreconditioner build(const GradedMesh& mesh, double alpha,
                                      Scheme scheme, int l);

    // From explicit band storage: band[i][d] holds entry (i, i + d - (l-1)),
    // d in [0, 2l-2]; out-of-range cells must be zero.
    BandedPreconditioner(int n, int l, std::vector<double> band);

    int rows() const { return n_; }
    int half_width() const { return l_; }

    // z with P z = r via the banded LU factors.
    void solve(std::span<const double> r, std::span<double> z) const;
    std::vector<double> solve(std::span<const double> r) const;

private:
    void factor();

    int n_ = 0;
    int l_ = 1;
    int width_ = 1;              // 2l - 1
    std::vector<double> band_;   // source band (kept for diagnostics)
    std::vector<double> lu_;     // in-place factors, same layout
};

inline BandedPreconditioner build_banded_preconditioner(const GradedMesh& mesh,
                                                        double alpha, Scheme scheme,
                                                        int l) {
    return BandedPreconditioner::build(mesh, alpha, scheme, l);
}

inline std::vector<double> banded_solve(const BandedPreconditioner& p,
                                        std::span<const double> r) {
    return p.solve(r);
}

enum class Breakdown { rho_zero, omega_zero };

struct SolveReport {
    std::vector<double> solution;
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
    std::optional<Breakdown> breakdown;
    double wall_time_s = 0.0;
};

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

// Standard BiCGSTAB with shadow residual fixed to r0, early exit on a small
// intermediate residual s, and optional right preconditioning (solve P z = p
// before applying A), so reported residuals are residuals of the original
// system. Breakdowns (rho = 0, omega = 0) are reported, not thrown; the best
// iterate so far is returned. Stopping rule: ||f - A x||_2 / ||f||_2 <= tol.
SolveReport bicgstab(const LinearMap& apply_a, std::span<const double> f,
                     std::span<const double> x0, double tol, int max_iter,
                     const BandedPreconditioner* precond = nullptr);

// Partial-pivoted LU solve; the elimination baseline. Destroys its copy of A.
std::vector<double> dense_gaussian_elimination(DenseMatrix a, std::vector<double> f);

}  // namespace fraclap
