#include "fraclap/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "fraclap/errors.hpp"
#include "fraclap/soe.hpp"
#include "fraclap/special.hpp"

namespace fraclap {

namespace {

double getoor_coefficient(double alpha) {
    const double sqrt_pi = 1.7724538509055160273;
    return std::exp2(-alpha) * sqrt_pi /
           (gamma_fn(0.5 * (1.0 + alpha)) * gamma_fn(1.0 + 0.5 * alpha));
}

// u in terms of the boundary distances d_left = x - a, d_right = b - x, which
// the mesh can provide at full relative precision near both endpoints.
double exact_from_distances(double alpha, double d_left, double d_right) {
    if (!(d_left > 0.0) || !(d_right > 0.0)) {
        return 0.0;
    }
    return getoor_coefficient(alpha) * std::pow(d_left * d_right, 0.5 * alpha);
}

}  // namespace

double exact_solution(double alpha, double x, double a, double b) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw validation_error("exact solution: alpha must lie in (0, 2)");
    }
    if (a != 0.0 || b != 2.0) {
        throw validation_error("exact solution: reference is defined on (0, 2) only");
    }
    return exact_from_distances(alpha, x - a, b - x);
}

double max_norm_error(std::span<const double> u_h, const GradedMesh& mesh, double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) {
        throw validation_error("exact solution: alpha must lie in (0, 2)");
    }
    if (mesh.a() != 0.0 || mesh.b() != 2.0) {
        throw validation_error("exact solution: reference is defined on (0, 2) only");
    }
    double worst = 0.0;
    for (int i = 1; i <= mesh.n() - 1; ++i) {
        const double u =
            exact_from_distances(alpha, mesh.dist_left(i), mesh.dist_right(i));
        worst = std::max(worst, std::abs(u - u_h[static_cast<size_t>(i - 1)]));
    }
    return worst;
}

double convergence_order(double e_coarse, double e_fine) {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0)) {
        throw validation_error("convergence order: errors must be positive");
    }
    return std::log2(e_coarse / e_fine);
}

KappaSpec KappaSpec::parse(const std::string& token) {
    KappaSpec spec;
    if (token == "uniform") {
        spec.kind = Kind::uniform;
        return spec;
    }
    if (token == "k2/(1+s)") {
        spec.kind = Kind::two_over_one_plus_sigma;
        return spec;
    }
    if (token == "k(2-a)/2s") {
        spec.kind = Kind::half_optimal;
        return spec;
    }
    if (token == "k(2-a)/s") {
        spec.kind = Kind::optimal;
        return spec;
    }
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == nullptr || *end != '\0' || token.empty()) {
        throw validation_error("kappa: unrecognized token '" + token + "'");
    }
    if (!(v >= 1.0)) {
        throw validation_error("kappa: numeric grading must be >= 1");
    }
    spec.kind = Kind::numeric;
    spec.value = v;
    return spec;
}

double KappaSpec::resolve(double alpha) const {
    const double sigma = 0.5 * alpha;
    double v = 1.0;
    switch (kind) {
        case Kind::numeric:
            v = value;
            break;
        case Kind::uniform:
            v = 1.0;
            break;
        case Kind::two_over_one_plus_sigma:
            v = 2.0 / (1.0 + sigma);
            break;
        case Kind::half_optimal:
            v = (2.0 - alpha) / (2.0 * sigma);
            break;
        case Kind::optimal:
            v = (2.0 - alpha) / sigma;
            break;
    }
    // Mesh precondition; the graded advantage vanishes where this clamps.
    return std::max(1.0, v);
}

int study_thread_cap() {
    const char* env = std::getenv("FRACLAP_THREADS");
    if (env == nullptr) {
        return 1;
    }
    const int v = std::atoi(env);
    return v > 0 ? v : 1;
}

namespace {

void validate_config(const StudyConfig& config) {
    if (config.alphas.empty() || config.n_list.empty() || config.kappas.empty()) {
        throw validation_error("study: alphas, kappas and N list must be nonempty");
    }
    for (double alpha : config.alphas) {
        if (!(alpha > 0.0 && alpha < 2.0)) {
            throw validation_error("study: alpha must lie in (0, 2)");
        }
        if (config.scheme == SchemeKind::direct && alpha >= 1.0 - 1e-12) {
            throw validation_error("study: the direct scheme requires alpha in (0, 1)");
        }
    }
    for (int n : config.n_list) {
        if (n % 2 != 0) {
            throw validation_error("study: N must be even");
        }
        if (n < 4) {
            throw validation_error("study: N must be at least 4");
        }
    }
    const bool dense_solver =
        config.solver == SolverKind::ge || config.solver == SolverKind::bicgstab;
    if ((config.scheme == SchemeKind::direct) != dense_solver) {
        throw validation_error(
            "study: scheme 'direct' pairs with solvers ge/bicgstab; original/modified "
            "pair with f-bicgstab/pf-bicgstab");
    }
    if (!(config.eps_soe > 0.0) || !(config.tol > 0.0)) {
        throw validation_error("study: eps-soe and tol must be positive");
    }
    if (config.band_l < 1) {
        throw validation_error("study: band half-width l must be >= 1");
    }
    if (config.repeats < 1) {
        throw validation_error("study: repeats must be >= 1");
    }
    if (!(config.b > config.a)) {
        throw validation_error("study: invalid domain");
    }
}

StudyRow run_single(const StudyConfig& config, double alpha, double kappa, int n) {
    StudyRow row;
    row.alpha = alpha;
    row.kappa = kappa;
    row.n = n;
    row.scheme = config.scheme;
    row.solver = config.solver;

    const GradedMesh mesh = build_graded_mesh(config.a, config.b, n, kappa);
    const int max_iter = config.max_iter > 0 ? config.max_iter : 10 * n;
    const double c_alpha = normalization_constant(alpha);
    std::vector<double> f(static_cast<size_t>(n - 1), 1.0);

    std::vector<double> wall_times;
    wall_times.reserve(static_cast<size_t>(config.repeats));
    std::vector<double> solution;

    if (config.scheme == SchemeKind::direct) {
        const DirectMatrix direct = assemble_direct_matrix(mesh, alpha);
        std::vector<double> f_scaled(f);
        for (double& v : f_scaled) {
            v /= c_alpha;
        }
        for (int rep = 0; rep < config.repeats; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            if (config.solver == SolverKind::ge) {
                solution = dense_gaussian_elimination(direct.entries, f_scaled);
                row.converged = true;
                row.iterations = std::nullopt;
            } else {
                const std::vector<double> x0(f.size(), 0.0);
                LinearMap map = [&direct](std::span<const double> v, std::span<double> out) {
                    direct.entries.apply(v, out);
                };
                SolveReport rep_out = bicgstab(map, f_scaled, x0, config.tol, max_iter);
                solution = std::move(rep_out.solution);
                row.converged = rep_out.converged;
                row.iterations = rep_out.iterations;
            }
            wall_times.push_back(std::chrono::duration<double>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count());
        }
    } else {
        const Scheme scheme =
            config.scheme == SchemeKind::original ? Scheme::original : Scheme::modified;
        const double beta = alpha < 1.0 ? 1.0 + alpha : alpha;
        const SoeApproximation soe =
            build_soe(beta, config.eps_soe, mesh.h_min(), config.b - config.a);
        const FastOperator op(mesh, alpha, scheme, soe);
        LinearMap map = [&op](std::span<const double> v, std::span<double> out) {
            op.apply(v, out);
        };
        std::optional<BandedPreconditioner> precond;
        if (config.solver == SolverKind::pf_bicgstab) {
            precond.emplace(BandedPreconditioner::build(mesh, alpha, scheme, config.band_l));
        }
        const std::vector<double> x0(f.size(), 0.0);
        for (int rep = 0; rep < config.repeats; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            SolveReport rep_out = bicgstab(map, f, x0, config.tol, max_iter,
                                           precond ? &*precond : nullptr);
            solution = std::move(rep_out.solution);
            row.converged = rep_out.converged;
            row.iterations = rep_out.iterations;
            wall_times.push_back(std::chrono::duration<double>(
                                     std::chrono::steady_clock::now() - t0)
                                     .count());
        }
    }

    std::sort(wall_times.begin(), wall_times.end());
    row.wall_time_s = config.timing ? wall_times[wall_times.size() / 2] : 0.0;
    row.error_inf = max_norm_error(solution, mesh, alpha);
    return row;
}

}  // namespace

std::vector<StudyRow> run_convergence_study(const StudyConfig& config) {
    validate_config(config);

    struct Item {
        double alpha;
        double kappa;
        int n;
    };
    std::vector<Item> items;
    for (double alpha : config.alphas) {
        for (const KappaSpec& spec : config.kappas) {
            const double kappa = spec.resolve(alpha);
            for (int n : config.n_list) {
                items.push_back(Item{alpha, kappa, n});
            }
        }
    }

    std::vector<StudyRow> rows(items.size());
    const int threads = std::min<int>(study_thread_cap(), static_cast<int>(items.size()));
    if (threads <= 1) {
        for (size_t k = 0; k < items.size(); ++k) {
            rows[k] = run_single(config, items[k].alpha, items[k].kappa, items[k].n);
        }
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(threads));
        std::exception_ptr first_error;
        std::mutex error_mutex;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const size_t k = next.fetch_add(1);
                    if (k >= items.size()) {
                        return;
                    }
                    try {
                        rows[k] = run_single(config, items[k].alpha, items[k].kappa,
                                             items[k].n);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) {
                            first_error = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
        for (std::thread& t : pool) {
            t.join();
        }
        if (first_error) {
            std::rethrow_exception(first_error);
        }
    }

    // Orders chain rows with the same (alpha, kappa, scheme, solver) and N/2.
    for (size_t k = 0; k < rows.size(); ++k) {
        for (size_t j = 0; j < rows.size(); ++j) {
            if (j == k) {
                continue;
            }
            if (rows[j].alpha == rows[k].alpha && rows[j].kappa == rows[k].kappa &&
                rows[j].scheme == rows[k].scheme && rows[j].solver == rows[k].solver &&
                rows[j].n * 2 == rows[k].n && rows[j].error_inf > 0.0 &&
                rows[k].error_inf > 0.0) {
                rows[k].order = convergence_order(rows[j].error_inf, rows[k].error_inf);
            }
        }
    }
    return rows;
}

const char* to_token(SchemeKind s) {
    switch (s) {
        case SchemeKind::original:
            return "original";
        case SchemeKind::modified:
            return "modified";
        case SchemeKind::direct:
            return "direct";
    }
    return "?";
}

const char* to_token(SolverKind s) {
    switch (s) {
        case SolverKind::ge:
            return "ge";
        case SolverKind::bicgstab:
            return "bicgstab";
        case SolverKind::f_bicgstab:
            return "f-bicgstab";
        case SolverKind::pf_bicgstab:
            return "pf-bicgstab";
    }
    return "?";
}

SchemeKind scheme_from_token(const std::string& token) {
    if (token == "original") {
        return SchemeKind::original;
    }
    if (token == "modified") {
        return SchemeKind::modified;
    }
    if (token == "direct") {
        return SchemeKind::direct;
    }
    throw validation_error("scheme: unrecognized token '" + token + "'");
}

SolverKind solver_from_token(const std::string& token) {
    if (token == "ge") {
        return SolverKind::ge;
    }
    if (token == "bicgstab") {
        return SolverKind::bicgstab;
    }
    if (token == "f-bicgstab") {
        return SolverKind::f_bicgstab;
    }
    if (token == "pf-bicgstab") {
        return SolverKind::pf_bicgstab;
    }
    throw validation_error("solver: unrecognized token '" + token + "'");
}

}  // namespace fraclap
