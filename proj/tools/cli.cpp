#include "cli.hpp"

#include <ostream>

#include <CLI11.hpp>

#include "fraclap/errors.hpp"
#include "fraclap/fast_operator.hpp"
#include "fraclap/soe.hpp"
#include "fraclap/table.hpp"

namespace fraclap::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;
constexpr int kExitSoe = 4;

void run_audits(const StudyConfig& config, std::ostream& out) {
    for (double alpha : config.alphas) {
        for (const KappaSpec& spec : config.kappas) {
            const double kappa = spec.resolve(alpha);
            for (int n : config.n_list) {
                const GradedMesh mesh = build_graded_mesh(config.a, config.b, n, kappa);
                DenseMatrix m;
                if (config.scheme == SchemeKind::direct) {
                    m = assemble_direct_matrix(mesh, alpha).entries;
                } else {
                    const Scheme scheme = config.scheme == SchemeKind::original
                                              ? Scheme::original
                                              : Scheme::modified;
                    const double beta = alpha < 1.0 ? 1.0 + alpha : alpha;
                    const SoeApproximation soe =
                        build_soe(beta, config.eps_soe, mesh.h_min(), config.b - config.a);
                    const FastOperator op(mesh, alpha, scheme, soe);
                    m = materialize_fast_matrix(op, MatrixScaling::unscaled);
                }
                const AuditReport rep = audit_solvability(m, mesh, alpha, config.eps_soe);
                out << "audit alpha=" << alpha << " kappa=" << kappa << " N=" << n
                    << " scheme=" << to_token(config.scheme)
                    << " diag_positive=" << (rep.diag_all_positive ? "yes" : "no")
                    << " offdiag_nonpositive=" << (rep.offdiag_all_nonpositive ? "yes" : "no")
                    << " min_row_gap=" << rep.min_row_gap;
                if (rep.eps_threshold) {
                    out << " eps_threshold=" << *rep.eps_threshold;
                }
                if (rep.g_alpha) {
                    out << " g_alpha=" << *rep.g_alpha;
                }
                if (config.scheme == SchemeKind::original && alpha >= 1.0) {
                    out << " theory=unsupported";
                }
                out << " pass=" << (rep.pass ? "yes" : "no") << "\n";
            }
        }
    }
}

}  // namespace

CliOptions parse(const std::vector<std::string>& args) {
    CLI::App app{"Fractional Laplacian collocation solver on graded grids"};
    app.allow_extras(false);

    CliOptions options;
    StudyConfig& cfg = options.config;

    std::vector<double> alphas;
    std::vector<std::string> kappas{"uniform"};
    std::vector<int> n_list;
    std::string scheme = "original";
    std::string solver = "pf-bicgstab";
    std::string output = "csv";
    bool no_timing = false;

    app.add_option("--alpha", alphas, "fractional orders in (0,2)")
        ->required()
        ->delimiter(',');
    app.add_option("--kappa", kappas,
                   "grading parameters: numbers >= 1 or tokens uniform, k2/(1+s), "
                   "k(2-a)/2s, k(2-a)/s")
        ->delimiter(',');
    app.add_option("--N", n_list, "even grid sizes >= 4")->required()->delimiter(',');
    app.add_option("--scheme", scheme, "original | modified | direct");
    app.add_option("--solver", solver, "ge | bicgstab | f-bicgstab | pf-bicgstab");
    app.add_option("--eps-soe", cfg.eps_soe, "kernel compression tolerance");
    app.add_option("--tol", cfg.tol, "relative residual stopping tolerance");
    app.add_option("--max-iter", cfg.max_iter, "iteration cap (default 10N)");
    app.add_option("--band-l", cfg.band_l, "preconditioner half-width l (bandwidth 2l-1)");
    app.add_option("--output", output, "csv | markdown");
    app.add_option("--repeats", cfg.repeats, "timing repeats (median reported)");
    app.add_flag("--no-timing", no_timing, "zero wall_time_s for byte-stable output");
    app.add_flag("--audit", options.audit, "print solvability audits instead of solving");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        throw validation_error(std::string("cli: ") + e.what());
    }

    cfg.alphas = alphas;
    cfg.n_list = n_list;
    cfg.kappas.clear();
    for (const std::string& token : kappas) {
        cfg.kappas.push_back(KappaSpec::parse(token));
    }
    cfg.scheme = scheme_from_token(scheme);
    cfg.solver = solver_from_token(solver);
    cfg.timing = !no_timing;
    if (output == "csv") {
        cfg.output = OutputFormat::csv;
    } else if (output == "markdown") {
        cfg.output = OutputFormat::markdown;
    } else {
        throw validation_error("cli: unknown output format '" + output + "'");
    }
    return options;
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        const CliOptions options = parse(args);
        if (options.audit) {
            run_audits(options.config, out);
            return kExitOk;
        }
        if (options.config.scheme == SchemeKind::original) {
            for (double alpha : options.config.alphas) {
                if (alpha >= 1.0) {
                    err << "note: the original scheme has no solvability guarantee for "
                           "alpha >= 1 (theory=unsupported); the modified scheme is the "
                           "robust choice there\n";
                    break;
                }
            }
        }
        const std::vector<StudyRow> rows = run_convergence_study(options.config);
        out << emit_table(rows, options.config.output);
        for (const StudyRow& row : rows) {
            if (!row.converged) {
                err << "solver failed to converge at alpha=" << row.alpha
                    << " kappa=" << row.kappa << " N=" << row.n << "\n";
                return kExitSolver;
            }
        }
        return kExitOk;
    } catch (const soe_build_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitSoe;
    } catch (const validation_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const solver_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitSolver;
    }
}

}  // namespace fraclap::cli
