// Batch front-end: single solves, (N, alpha, n) sweeps, plot-data emission,
// and a built-in oracle check suite.

#include <CLI11.hpp>

#include <clocale>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fkdisk/fkdisk.hpp"

namespace {

fkdisk::BoundarySpec spec_from_flags(const std::string& kind, const std::string& alpha,
                                     int segments) {
    using namespace fkdisk;
    const BoundaryKind k = kind_from_name(kind);
    const Fraction a = Fraction::parse(alpha);
    switch (k) {
        case BoundaryKind::FullDirichlet: return BoundarySpec::full_dirichlet();
        case BoundaryKind::SingleArc: return BoundarySpec::single_arc(a);
        case BoundaryKind::Periodic: return BoundarySpec::periodic(segments, a);
    }
    throw std::invalid_argument("bad kind");
}

int run_solve(const std::string& kind, const std::string& alpha, int segments,
              std::vector<int> n_list, const std::string& out_dir) {
    using namespace fkdisk;
    const BoundarySpec spec = spec_from_flags(kind, alpha, segments);

    SweepConfig config;
    CaseConfig cc;
    cc.id = "solve";
    cc.spec = spec;
    cc.n_list = n_list;
    config.cases.push_back(cc);

    if (!out_dir.empty()) {
        config.output_dir = out_dir;
        config.force = true;
        const SweepReport report = run_sweep(config);
        const auto& r = report.results.front();
        if (!r.error.empty()) {
            std::cerr << "error: " << r.error << "\n";
            return 2;
        }
        std::cout << r.record.dump(2) << "\n";
        return report.failures == 0 ? 0 : 1;
    }

    ExtrapolationOptions opts;
    opts.n_list = n_list;
    const CriticalEstimate est = extrapolate_in_n(spec, opts);
    std::cout << critical_estimate_to_json(spec, est).dump(2) << "\n";
    if (est.finest_field) {
        const CoreAnalysis core = analyze_core(*est.finest_field);
        std::cout << core_analysis_to_json(core).dump(2) << "\n";
    }
    return est.accepted() ? 0 : 1;
}

int run_validate() {
    using namespace fkdisk;
    int failures = 0;
    const auto check = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
        if (!detail.empty()) std::cout << "  (" << detail << ")";
        std::cout << "\n";
        if (!ok) ++failures;
    };

    // Closed-form profile satisfies the equation (high-order finite differences).
    {
        const ClassicalSolution sol = classical_solution(0.7);
        double worst = 0.0;
        const double h = 1e-3;
        for (double rho = 0.05; rho < 0.95; rho += 0.05) {
            const auto u = [&](double r) { return sol(r); };
            const double d1 = (-u(rho + 2 * h) + 8 * u(rho + h) - 8 * u(rho - h) +
                               u(rho - 2 * h)) / (12 * h);
            const double d2 = (-u(rho + 2 * h) + 16 * u(rho + h) - 30 * u(rho) +
                               16 * u(rho - h) - u(rho - 2 * h)) / (12 * h * h);
            worst = std::max(std::fabs(d2 + d1 / rho + sol.lambda_sq * std::exp(u(rho))),
                             worst);
        }
        check("closed-form profile solves the equation", worst < 1e-8,
              "max residual " + format_value(worst, 3));
    }

    // Quadratic fold fit recovers synthetic data exactly.
    {
        ContinuationTrace synth;
        synth.termination = TraceTermination::FoldProximity;
        for (int k = 0; k < 10; ++k) {
            const double nu = 1.0 + 0.035 * k;
            const double lam_sq = 2.0 - 0.5 * (nu - 1.4) * (nu - 1.4);
            synth.points.push_back({std::sqrt(lam_sq), nu, 1, nullptr});
        }
        const FoldFit fit = fit_fold(synth);
        const bool ok = fit.accepted() &&
                        std::fabs(fit.lambda_cr_sq - 2.0) < 1e-10 &&
                        std::fabs(fit.C - 0.5) < 1e-9 && std::fabs(fit.u0 - 1.4) < 1e-9;
        check("synthetic fold fit recovered", ok,
              "lambda_cr_sq " + format_value(fit.lambda_cr_sq));
    }

    // Radial reference solver against the closed form.
    {
        const ClassicalSolution sol = classical_solution(0.5);
        const RadialProfile prof = solve_radial(sol.lambda_sq, 0.0, 4096);
        double worst = 0.0;
        for (std::size_t i = 0; i < prof.radius.size(); ++i) {
            worst = std::max(worst, std::fabs(prof.v[i] - sol(prof.radius[i])));
        }
        check("radial reference matches closed form", worst < 1e-7,
              "max error " + format_value(worst, 3));
    }

    // Small fully conducting pipeline hits the known critical value.
    {
        ExtrapolationOptions opts;
        opts.n_list = {32, 64, 128};
        const CriticalEstimate est =
            extrapolate_in_n(BoundarySpec::full_dirichlet(), opts);
        const bool ok = est.accepted() &&
                        std::fabs(est.extrapolated_lambda_cr_sq - 2.0) < 0.01;
        check("fully conducting pipeline near 2.0", ok,
              "a = " + format_value(est.extrapolated_lambda_cr_sq));
    }

    std::cout << (failures == 0 ? "all checks passed" : "checks FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_NUMERIC, "C");
    CLI::App app{"Critical explosion thresholds on a disk with partially insulated walls"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "run one case and print its record");
    std::string kind = "full_dirichlet", alpha = "1", out_dir;
    int segments = 1;
    std::vector<int> n_list = {64, 128, 256};
    solve->add_option("--kind", kind, "full_dirichlet | single_arc | periodic");
    solve->add_option("--alpha", alpha, "conducting fraction, e.g. 1/32 or 0.25");
    solve->add_option("--segments", segments, "segment count N (periodic)");
    solve->add_option("--n-list", n_list, "grid sizes for the extrapolation")
        ->expected(3, 16);
    solve->add_option("--out", out_dir, "also write case artifacts to this directory");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run all cases of a config file");
    std::string config_path, sweep_out;
    int jobs = 0;
    bool force = false, dry_run = false;
    sweep->add_option("--config", config_path, "JSON sweep configuration")->required();
    sweep->add_option("--out", sweep_out, "output directory (overrides config)");
    sweep->add_option("--jobs", jobs, "concurrent cases");
    sweep->add_flag("--force", force, "recompute cases with existing records");
    sweep->add_flag("--dry-run", dry_run, "validate the config, write nothing");

    // emit-figures
    auto* figures = app.add_subcommand("emit-figures", "write fig2/fig3/fig4 csv files");
    std::string report_dir, fig3_case;
    figures->add_option("--report", report_dir, "directory with case records")->required();
    figures->add_option("--fig3-case", fig3_case, "case id for the surface dump");

    // validate
    app.add_subcommand("validate", "run the built-in oracle checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) {
            return run_solve(kind, alpha, segments, n_list, out_dir);
        }
        if (sweep->parsed()) {
            fkdisk::SweepConfig config = fkdisk::sweep_config_from_file(config_path);
            if (!sweep_out.empty()) config.output_dir = sweep_out;
            if (jobs > 0) config.jobs = jobs;
            config.force = force;
            config.dry_run = dry_run;
            const fkdisk::SweepReport report = fkdisk::run_sweep(config);
            if (dry_run) {
                std::cout << "config ok: " << report.results.size() << " cases\n";
                return 0;
            }
            for (const auto& r : report.results) {
                std::cout << r.id << ": "
                          << (!r.error.empty() ? "error: " + r.error
                              : !r.accepted    ? std::string("retry cap exceeded")
                                               : std::string("ok"))
                          << (r.skipped ? " (cached)" : "") << "\n";
            }
            std::cout << "failures: " << report.failures << "\n";
            return report.failures == 0 ? 0 : 1;
        }
        if (figures->parsed()) {
            const auto missing = fkdisk::emit_figures(report_dir, fig3_case);
            for (const auto& m : missing) std::cerr << "missing: " << m << "\n";
            return missing.empty() ? 0 : 1;
        }
        return run_validate();
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}
