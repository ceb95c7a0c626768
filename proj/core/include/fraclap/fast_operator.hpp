#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fraclap/dense.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/soe.hpp"

namespace fraclap {

enum class Scheme { original, modified };

// Dispatch on the fractional order: sub (alpha < 1) runs the kernel-side
// recurrences with mu/nu weights, one (alpha = 1) and super (alpha > 1) run
// the integrated-by-parts recurrences with the tilde weights.
enum class AlphaRegime { sub, one, super };

// |alpha - 1| < 1e-12 counts as alpha = 1 to keep 1/(1-alpha) away from the
// logarithmic branch point.
AlphaRegime alpha_regime(double alpha);

// C_alpha = alpha 2^{alpha-1} Gamma((1+alpha)/2) / (sqrt(pi) Gamma(1-alpha/2)).
// Requires 0 < alpha < 2.
double normalization_constant(double alpha);

// Recurrence coefficient tables for the left/right sweeps.
//
// All tables are row-major with stride ne and a 1-based interval index
// (row 0 unused): omega[i][s] = e^{-lambda_s h_i} for 1 <= i <= N,
// mu_l/nu_l are valid for 2 <= i <= N-1, mu_r/nu_r for 1 <= i <= N-2. In the
// one/super regimes mu_* hold the tilde coefficients and nu_* are empty.
//
// For large problems (tables above ~256 MB) nothing is materialized and the
// sweeps recompute the same values on the fly; both paths share the per-entry
// helpers below, so results are bit-identical.
struct CoefficientTables {
    AlphaRegime regime = AlphaRegime::sub;
    int n = 0;
    int ne = 0;
    bool materialized = false;
    std::vector<double> omega;
    std::vector<double> mu_l;
    std::vector<double> nu_l;
    std::vector<double> mu_r;
    std::vector<double> nu_r;

    double omega_at(int i, int s) const { return omega[static_cast<size_t>(i) * ne + s]; }
    double mu_l_at(int i, int s) const { return mu_l[static_cast<size_t>(i) * ne + s]; }
    double nu_l_at(int i, int s) const { return nu_l[static_cast<size_t>(i) * ne + s]; }
    double mu_r_at(int i, int s) const { return mu_r[static_cast<size_t>(i) * ne + s]; }
    double nu_r_at(int i, int s) const { return nu_r[static_cast<size_t>(i) * ne + s]; }
};

namespace coeff {
// Exponential factors with lambda*h > 50 are flushed to zero: e^{-50} ~ 2e-22
// is far below every tolerance in play, and the recurrence state dies with
// omega anyway. Keeping the cutoff here makes the materialized and streaming
// paths bit-identical.
double omega_of(double lambda, double h);
// mu/nu of the kernel-side recurrences; omega_i = e^{-lambda h_i} must be the
// already-computed factor for the :current: interval, h_prev the width of the
// cell being integrated over.
double mu_side(double omega_i, double lambda, double h_prev);
double nu_side(double omega_i, double lambda, double h_prev);
// tilde mu of the integrated-by-parts recurrences.
double mu_tilde_side(double omega_i, double lambda, double h_prev);
}  // namespace coeff

inline constexpr size_t kDefaultTableBudgetBytes = 256ull << 20;

// Populates the tables (or decides to stream when they would exceed the
// memory budget). Validates that the compression window covers [h_min, b-a]
// and that soe.beta matches the regime (1 + alpha for sub, alpha for
// one/super).
CoefficientTables precompute_coefficients(const GradedMesh& mesh,
                                          const SoeApproximation& soe, double alpha,
                                          size_t table_budget_bytes = kDefaultTableBudgetBytes);

// Immutable bundle of mesh, order, scheme variant, compression and
// precomputed coefficients. apply() is matrix-free with O(N*Ne) work and
// O(N + Ne) sweep state; concurrent calls on the same operator are safe.
class FastOperator {
public:
    FastOperator(GradedMesh mesh, double alpha, Scheme scheme, SoeApproximation soe,
                 size_t table_budget_bytes = kDefaultTableBudgetBytes);

    const GradedMesh& mesh() const { return mesh_; }
    double alpha() const { return alpha_; }
    Scheme scheme() const { return scheme_; }
    AlphaRegime regime() const { return regime_; }
    double c_alpha() const { return c_alpha_; }
    const SoeApproximation& soe() const { return soe_; }
    const CoefficientTables& coefficients() const { return coeffs_; }

    // eta_i^alpha for 1 <= i <= N-1 (slot 0 unused); identically zero on a
    // uniform mesh. Only the modified scheme reads it.
    std::span<const double> eta() const { return eta_; }

    // v holds the N-1 interior values; v_0 = v_N = 0 implied.
    void apply(std::span<const double> v, std::span<double> out) const;
    std::vector<double> apply(std::span<const double> v) const;

    // Same operator without the C_alpha scaling; audits use this.
    void apply_unscaled(std::span<const double> v, std::span<double> out) const;

private:
    void local_into(std::span<const double> v, std::span<double> out) const;

    GradedMesh mesh_;
    double alpha_;
    Scheme scheme_;
    AlphaRegime regime_;
    double c_alpha_;
    SoeApproximation soe_;
    CoefficientTables coeffs_;
    std::vector<double> h_pow_;   // h_i^{-alpha}, index 1..N
    std::vector<double> log_h_;   // ln(h_i)/h_i, index 1..N (alpha = 1 only)
    std::vector<double> eta_;     // index 1..N-1
};

inline std::vector<double> apply_fast(const FastOperator& op, std::span<const double> v) {
    return op.apply(v);
}

// Materialized recurrence sums, 1-based row index 1..N-1 (row 0 unused).
// The sub regime fills S^L/S^R, one/super fill the tilde variants.
struct SweepMatrix {
    int rows = 0;  // N
    int ne = 0;
    std::vector<double> data;

    double at(int i, int s) const { return data[static_cast<size_t>(i) * ne + s]; }
};

SweepMatrix sweep_left(const FastOperator& op, std::span<const double> v);
SweepMatrix sweep_right(const FastOperator& op, std::span<const double> v);

// Tridiagonal local contribution of the original scheme (log branch at
// alpha = 1) and the slope-times-eta contribution of the modified scheme.
// Both take and return interior vectors of length N-1, unscaled by C_alpha.
std::vector<double> local_part_original(const FastOperator& op, std::span<const double> v);
std::vector<double> local_part_modified(const FastOperator& op, std::span<const double> v);

// Direct-collocation stiffness matrix (exact kernel integrals, no
// compression). Closed-form entries; defined for alpha in (0,1) only.
struct DirectMatrix {
    double alpha = 0.0;
    DenseMatrix entries;  // (N-1) x (N-1), unscaled by C_alpha
};

DirectMatrix assemble_direct_matrix(const GradedMesh& mesh, double alpha);

enum class MatrixScaling { scaled, unscaled };

// Column j = apply(e_j); audit support only, capped at N <= 4096.
DenseMatrix materialize_fast_matrix(const FastOperator& op,
                                    MatrixScaling scaling = MatrixScaling::scaled);

struct AuditReport {
    bool diag_all_positive = false;
    bool offdiag_all_nonpositive = false;
    // min_i (a_ii - sum_{j != i} |a_ij|); strict dominance iff > 0.
    double min_row_gap = 0.0;
    // min over { -2 a^d_ij / (h_j + h_{j+1}), Xi_i / (b-a) } where the direct
    // matrix is defined (alpha < 1); the compression tolerance must stay
    // below this for the sign/dominance structure to be guaranteed.
    std::optional<double> eps_threshold;
    // Row-sum values Xi_i of the direct matrix (alpha < 1 only).
    std::vector<double> xi;
    // Uniform-grid threshold helper g_alpha(N) (alpha < 1, kappa = 1 only).
    std::optional<double> g_alpha;
    bool pass = false;
};

AuditReport audit_solvability(const DenseMatrix& m, const GradedMesh& mesh,
                              double alpha, double eps);

}  // namespace fraclap
