#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fraclap/fast_operator.hpp"
#include "fraclap/mesh.hpp"
#include "fraclap/solver.hpp"

namespace fraclap {

// Closed-form reference solution of (-Delta)^{alpha/2} u = 1 on (0,2) with
// zero exterior data:
//   u(x) = 2^{-alpha} sqrt(pi) / (Gamma((1+alpha)/2) Gamma(1+alpha/2))
//          * [x(2-x)]^{alpha/2} for x in (0,2), else 0.
// Only the (a,b) = (0,2) domain carries a reference solution here.
double exact_solution(double alpha, double x, double a, double b);

// max_i |u(x_i) - U_i| over the interior nodes against the reference above.
double max_norm_error(std::span<const double> u_h, const GradedMesh& mesh, double alpha);

// log2(e_coarse / e_fine); both must be positive.
double convergence_order(double e_coarse, double e_fine);

enum class SchemeKind { original, modified, direct };
enum class SolverKind { ge, bicgstab, f_bicgstab, pf_bicgstab };
enum class OutputFormat { csv, markdown };

// Grading parameter, either numeric or one of the symbolic tokens that
// mirror the table row labels: "uniform" (1), "k2/(1+s)" (2/(1+sigma)),
// "k(2-a)/2s" ((2-alpha)/(2 sigma)), "k(2-a)/s" ((2-alpha)/sigma), with
// sigma = alpha/2. Symbolic values resolve per alpha and are clamped to the
// mesh precondition kappa >= 1.
struct KappaSpec {
    enum class Kind { numeric, uniform, two_over_one_plus_sigma, half_optimal, optimal };
    Kind kind = Kind::uniform;
    double value = 1.0;  // numeric only

    static KappaSpec parse(const std::string& token);
    double resolve(double alpha) const;
};

struct StudyConfig {
    std::vector<double> alphas;
    std::vector<KappaSpec> kappas;
    std::vector<int> n_list;
    SchemeKind scheme = SchemeKind::original;
    SolverKind solver = SolverKind::pf_bicgstab;
    double eps_soe = 1e-8;
    double tol = 1e-8;
    int max_iter = 0;  // 0 -> 10 N
    int band_l = 2;
    OutputFormat output = OutputFormat::csv;
    int repeats = 1;        // wall time = median over repeats
    bool timing = true;     // false zeroes wall_time_s for byte-stable output
    double a = 0.0;
    double b = 2.0;
};

struct StudyRow {
    double alpha = 0.0;
    double kappa = 1.0;
    int n = 0;
    SchemeKind scheme = SchemeKind::original;
    SolverKind solver = SolverKind::pf_bicgstab;
    double error_inf = 0.0;
    std::optional<double> order;
    std::optional<int> iterations;
    double wall_time_s = 0.0;
    bool converged = true;  // not serialized; drives the exit code
};

// One row per (alpha, kappa, N): mesh -> compression with the window
// [h_min, b-a] -> operator -> f = 1 -> solve -> error/order. Rows are ordered
// by the configuration loop nest; FRACLAP_THREADS > 1 computes them
// concurrently with the same output ordering. Solver non-convergence is
// returned as a flagged row, not thrown.
std::vector<StudyRow> run_convergence_study(const StudyConfig& config);

// Parallelism cap from FRACLAP_THREADS (default 1).
int study_thread_cap();

const char* to_token(SchemeKind s);
const char* to_token(SolverKind s);
SchemeKind scheme_from_token(const std::string& token);
SolverKind solver_from_token(const std::string& token);

}  // namespace fraclap
