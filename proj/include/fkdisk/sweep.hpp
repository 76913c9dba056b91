#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fkdisk/analysis.hpp"
#include "fkdisk/continuation.hpp"
#include "fkdisk/io.hpp"

namespace fkdisk {

struct CaseConfig {
    std::string id;
    BoundarySpec spec;
    std::vector<int> n_list;
};

/// Solver knobs shared by all cases of a sweep.
struct SweepSettings {
    StepPolicy policy;
    double accept_rel_residual = 1e-3;
    int retry_cap = 2;
    double fold_accept_rms = 1e-4;
    int fold_window = 10;
    double core_variation_threshold = 1e-4;
};

struct SweepConfig {
    std::vector<CaseConfig> cases;
    SweepSettings settings;
    std::filesystem::path output_dir;
    int jobs = 1;
    bool force = false;
    bool dry_run = false;
    bool write_traces = true;
};

inline SweepConfig sweep_config_from_json(const nlohmann::json& j) {
    SweepConfig config;
    if (j.contains("output")) config.output_dir = j.at("output").get<std::string>();
    if (j.contains("jobs")) config.jobs = j.at("jobs").get<int>();
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        auto& p = config.settings.policy;
        if (s.contains("initial_step")) p.initial_step = s.at("initial_step").get<double>();
        if (s.contains("step_floor")) p.step_floor = s.at("step_floor").get<double>();
        if (s.contains("step_growth")) p.step_growth = s.at("step_growth").get<double>();
        if (s.contains("norm_step_fraction"))
            p.norm_step_fraction = s.at("norm_step_fraction").get<double>();
        if (s.contains("max_steps")) p.max_steps = s.at("max_steps").get<int>();
        if (s.contains("newton_tol")) p.newton_tol = s.at("newton_tol").get<double>();
        if (s.contains("newton_max_iter"))
            p.newton_max_iter = s.at("newton_max_iter").get<int>();
        if (s.contains("accept_rel_residual"))
            config.settings.accept_rel_residual = s.at("accept_rel_residual").get<double>();
        if (s.contains("retry_cap")) config.settings.retry_cap = s.at("retry_cap").get<int>();
        if (s.contains("fold_accept_rms"))
            config.settings.fold_accept_rms = s.at("fold_accept_rms").get<double>();
        if (s.contains("core_variation_threshold"))
            config.settings.core_variation_threshold =
                s.at("core_variation_threshold").get<double>();
    }
    if (!j.contains("cases") || !j.at("cases").is_array() || j.at("cases").empty()) {
        throw std::invalid_argument("config needs a non-empty 'cases' array");
    }
    std::set<std::string> seen;
    for (const auto& c : j.at("cases")) {
        CaseConfig cc;
        cc.spec = boundary_spec_from_json(c);
        if (c.contains("id")) {
            cc.id = c.at("id").get<std::string>();
        } else {
            std::ostringstream id;
            id << kind_name(cc.spec.kind);
            if (cc.spec.kind == BoundaryKind::Periodic) id << "_N" << cc.spec.segments;
            if (!cc.spec.fully_conducting())
                id << "_a" << cc.spec.alpha.num() << "-" << cc.spec.alpha.den();
            cc.id = id.str();
        }
        if (!seen.insert(cc.id).second) {
            throw std::invalid_argument("duplicate case id: " + cc.id);
        }
        if (c.contains("n_list")) {
            cc.n_list = c.at("n_list").get<std::vector<int>>();
        } else {
            cc.n_list = {64, 128, 256};
        }
        if (cc.n_list.size() < 3) {
            throw std::invalid_argument("case " + cc.id + ": n_list needs >= 3 sizes");
        }
        for (std::size_t k = 1; k < cc.n_list.size(); ++k) {
            if (cc.n_list[k] <= cc.n_list[k - 1]) {
                throw std::invalid_argument("case " + cc.id +
                                            ": n_list must be strictly increasing");
            }
        }
        config.cases.push_back(std::move(cc));
    }
    return config;
}

inline SweepConfig sweep_config_from_file(const std::filesystem::path& path) {
    return sweep_config_from_json(nlohmann::json::parse(read_file(path)));
}

struct CaseResult {
    std::string id;
    BoundarySpec spec;
    bool completed = false;  // produced (or loaded) a usable record
    bool skipped = false;    // reused an existing record
    bool accepted = false;   // extrapolation accepted
    bool core_ok = false;
    std::string error;
    nlohmann::json record;
};

struct SweepReport {
    std::vector<CaseResult> results;
    int failures = 0;  // cases with errors, retry-cap or no-core diagnostics
    std::filesystem::path output_dir;
};

namespace detail {

inline std::string case_file_name(const std::string& id) { return "case_" + id + ".json"; }

/// Sort key (segments, alpha, id) used for all combined outputs.
inline bool case_order(const CaseResult& a, const CaseResult& b) {
    const int na = a.spec.sector_count(), nb = b.spec.sector_count();
    if (na != nb) return na < nb;
    const double aa = a.spec.alpha.value(), ab = b.spec.alpha.value();
    if (aa != ab) return aa < ab;
    return a.id < b.id;
}

inline void append_summary_rows(std::ostringstream& out, const CaseResult& r) {
    if (!r.record.contains("estimate")) return;
    const auto& est = r.record.at("estimate");
    const auto& core = r.record.at("core");
    for (const auto& row : est.at("per_n")) {
        out << r.id << ',' << r.record.at("spec").at("kind").get<std::string>() << ','
            << r.spec.sector_count() << ',' << r.spec.alpha.str() << ','
            << row.at("alpha_effective").get<std::string>() << ','
            << row.at("n").get<int>() << ',' << row.at("n_theta").get<int>() << ','
            << format_value(row.at("lambda_cr_sq").get<double>()) << ','
            << format_value(est.at("extrapolated_lambda_cr_sq").get<double>()) << ','
            << format_value(est.at("slope_b").get<double>()) << ','
            << format_value(est.at("fit_quality").get<double>()) << ','
            << est.at("status").get<std::string>() << ',';
        if (core.at("status").get<std::string>() == "ok") {
            out << format_value(core.at("rho_star").get<double>()) << ','
                << format_value(core.at("u_star").get<double>()) << ','
                << format_value(core.at("Lambda_sq").get<double>());
        } else {
            out << ",,";
        }
        out << ',' << core.at("status").get<std::string>() << "\n";
    }
}

}  // namespace detail

/// Emit plot-data files from the case records under `report_dir`:
/// fig2.csv (inv_alpha, lambda_cr_sq, N), fig3.csv (rho, theta, u surface of
/// one designated case), fig4.csv (inv_alpha, Lambda_sq, N). Returns a list
/// of missing-data diagnostics.
inline std::vector<std::string> emit_figures(const std::filesystem::path& report_dir,
                                             const std::string& fig3_case = "") {
    std::vector<std::string> missing;
    std::vector<CaseResult> cases;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(report_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("case_", 0) == 0 && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        CaseResult r;
        r.record = nlohmann::json::parse(read_file(path));
        r.id = r.record.at("id").get<std::string>();
        r.spec = boundary_spec_from_json(r.record.at("spec"));
        cases.push_back(std::move(r));
    }
    if (cases.empty()) {
        missing.push_back("no case records in " + report_dir.string());
        return missing;
    }
    std::sort(cases.begin(), cases.end(), detail::case_order);

    std::ostringstream fig2, fig4;
    fig2 << "inv_alpha,lambda_cr_sq,N\n";
    fig4 << "inv_alpha,Lambda_sq,N\n";
    for (const auto& r : cases) {
        const double inv_alpha = 1.0 / r.spec.alpha.value();
        const auto& est = r.record.at("estimate");
        if (est.at("status").get<std::string>() == "accepted") {
            fig2 << format_value(inv_alpha) << ','
                 << format_value(est.at("extrapolated_lambda_cr_sq").get<double>()) << ','
                 << r.spec.sector_count() << "\n";
        } else {
            missing.push_back("fig2: case " + r.id + " has no accepted estimate");
        }
        const auto& core = r.record.at("core");
        if (core.at("status").get<std::string>() == "ok") {
            fig4 << format_value(inv_alpha) << ','
                 << format_value(core.at("Lambda_sq").get<double>()) << ','
                 << r.spec.sector_count() << "\n";
        } else {
            missing.push_back("fig4: case " + r.id + " has no core analysis");
        }
    }
    atomic_write(report_dir / "fig2.csv", fig2.str());
    atomic_write(report_dir / "fig4.csv", fig4.str());

    // Designated surface case: explicit id, else the first periodic case.
    const CaseResult* designated = nullptr;
    for (const auto& r : cases) {
        if (!fig3_case.empty() ? r.id == fig3_case
                               : r.spec.kind == BoundaryKind::Periodic) {
            designated = &r;
            break;
        }
    }
    if (designated == nullptr) {
        missing.push_back("fig3: no periodic case available");
    } else {
        const auto field_path = report_dir / ("case_" + designated->id + "_field.csv");
        if (!std::filesystem::exists(field_path)) {
            missing.push_back("fig3: missing field dump " + field_path.string());
        } else {
            std::istringstream in(read_file(field_path));
            std::string line;
            std::ostringstream fig3;
            fig3 << "rho,theta,u\n";
            for (int k = 0; k < 3 && std::getline(in, line);) ++k;  // skip preamble
            while (std::getline(in, line)) fig3 << line << "\n";
            atomic_write(report_dir / "fig3.csv", fig3.str());
        }
    }
    return missing;
}

/// Run every configured case (extrapolation, core analysis, artifact files),
/// then write the combined table, per-segment-count scaling fits, and plot
/// data. Case records are written atomically; existing records are reused
/// unless `force` is set. Timestamps only go to run.log.
inline SweepReport run_sweep(const SweepConfig& config) {
    SweepReport report;
    report.output_dir = config.output_dir;
    report.results.resize(config.cases.size());

    if (config.dry_run) {
        for (std::size_t k = 0; k < config.cases.size(); ++k) {
            report.results[k].id = config.cases[k].id;
            report.results[k].spec = config.cases[k].spec;
        }
        return report;
    }
    if (config.output_dir.empty()) {
        throw std::invalid_argument("sweep needs an output directory");
    }
    std::filesystem::create_directories(config.output_dir);

    std::mutex log_mutex;
    std::ofstream log(config.output_dir / "run.log", std::ios::app);
    const auto log_line = [&](const std::string& text) {
        std::lock_guard<std::mutex> hold(log_mutex);
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        char stamp[32];
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%S", std::gmtime(&now));
        log << stamp << " " << text << "\n" << std::flush;
    };

    const auto process_case = [&](std::size_t k) {
        const CaseConfig& cc = config.cases[k];
        CaseResult& result = report.results[k];
        result.id = cc.id;
        result.spec = cc.spec;
        const auto record_path = config.output_dir / detail::case_file_name(cc.id);
        if (!config.force && std::filesystem::exists(record_path)) {
            try {
                result.record = nlohmann::json::parse(read_file(record_path));
                result.completed = true;
                result.skipped = true;
                result.accepted =
                    result.record.at("estimate").at("status").get<std::string>() ==
                    "accepted";
                result.core_ok =
                    result.record.at("core").at("status").get<std::string>() == "ok";
                log_line("case " + cc.id + ": reusing existing record");
                return;
            } catch (const std::exception&) {
                // fall through and recompute
            }
        }
        try {
            ExtrapolationOptions opts;
            opts.n_list = cc.n_list;
            opts.policy = config.settings.policy;
            opts.accept_rel_residual = config.settings.accept_rel_residual;
            opts.retry_cap = config.settings.retry_cap;
            opts.fold_accept_rms = config.settings.fold_accept_rms;
            opts.fold_window = config.settings.fold_window;

            std::vector<std::pair<int, std::string>> traces;
            if (config.write_traces) {
                opts.trace_observer = [&](int n, const ContinuationTrace& trace) {
                    traces.emplace_back(n, trace_to_csv(trace));
                };
            }
            const CriticalEstimate estimate = extrapolate_in_n(cc.spec, opts);

            CoreAnalysis core;
            if (estimate.finest_field) {
                core = analyze_core(*estimate.finest_field,
                                    config.settings.core_variation_threshold);
                if (core.ok() && estimate.accepted()) {
                    // Report the core parameter at the extrapolated critical
                    // value (the field itself is the finest-grid solution).
                    core.lambda_sq_core = core_parameter(
                        estimate.extrapolated_lambda_cr_sq, core.rho_star, core.u_star);
                }
            }

            nlohmann::json record;
            record["schema_version"] = data_schema_version;
            record["id"] = cc.id;
            record["spec"] = boundary_spec_to_json(cc.spec);
            record["n_list"] = cc.n_list;
            record["estimate"] = critical_estimate_to_json(cc.spec, estimate);
            record["core"] = core_analysis_to_json(core);
            record["core_note"] =
                "Lambda_sq uses the extrapolated lambda_cr_sq with the finest-grid "
                "field; fields are not extrapolated in n";

            for (const auto& [n, csv] : traces) {
                atomic_write(config.output_dir /
                                 ("case_" + cc.id + "_trace_n" + std::to_string(n) + ".csv"),
                             csv);
            }
            if (estimate.finest_field) {
                atomic_write(config.output_dir / ("case_" + cc.id + "_field.csv"),
                             field_to_csv(*estimate.finest_field));
            }
            atomic_write(record_path, record.dump(2) + "\n");

            result.record = std::move(record);
            result.completed = true;
            result.accepted = estimate.accepted();
            result.core_ok = core.ok();
            log_line("case " + cc.id + ": " +
                     (result.accepted ? "accepted" : "retry cap exceeded"));
        } catch (const std::exception& err) {
            result.error = err.what();
            log_line("case " + cc.id + ": error: " + result.error);
        }
    };

    const int jobs = std::max(1, std::min<int>(config.jobs,
                                               static_cast<int>(config.cases.size())));
    if (jobs == 1) {
        for (std::size_t k = 0; k < config.cases.size(); ++k) process_case(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs));
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (;;) {
                    const std::size_t k = next.fetch_add(1);
                    if (k >= config.cases.size()) return;
                    process_case(k);
                }
            });
        }
        for (auto& worker : workers) worker.join();
    }

    // Combined table, ordered by (N, alpha, n) regardless of completion order.
    std::vector<CaseResult> ordered;
    for (const auto& r : report.results) {
        if (r.completed) ordered.push_back(r);
    }
    std::sort(ordered.begin(), ordered.end(), detail::case_order);
    std::ostringstream summary;
    summary << "case_id,kind,segments,alpha,alpha_effective,n,n_theta,lambda_cr_sq_n,"
               "extrapolated_lambda_cr_sq,slope_b,fit_quality,estimate_status,"
               "rho_star,u_star,Lambda_sq,core_status\n";
    for (const auto& r : ordered) detail::append_summary_rows(summary, r);
    atomic_write(config.output_dir / "summary.csv", summary.str());

    // Per-segment-count power-law fits over the accepted periodic cases.
    std::map<int, std::vector<std::pair<double, double>>> by_segments;
    for (const auto& r : ordered) {
        if (r.accepted && r.spec.kind == BoundaryKind::Periodic) {
            by_segments[r.spec.segments].emplace_back(
                r.spec.alpha.value(),
                r.record.at("estimate").at("extrapolated_lambda_cr_sq").get<double>());
        }
    }
    std::ostringstream scaling;
    scaling << "N,S,t,alpha_low,alpha_high,relative_fit_residual,points\n";
    for (const auto& [segments, estimates] : by_segments) {
        if (estimates.size() < 4) continue;
        double lo = estimates.front().first, hi = lo;
        for (const auto& e : estimates) {
            lo = std::min(lo, e.first);
            hi = std::max(hi, e.first);
        }
        if (hi < 10.0 * lo) continue;
        const ScalingFit fit = fit_scaling_law(estimates, segments);
        scaling << segments << ',' << format_value(fit.S) << ',' << format_value(fit.t)
                << ',' << format_value(fit.alpha_low) << ','
                << format_value(fit.alpha_high) << ','
                << format_value(fit.relative_fit_residual) << ',' << estimates.size()
                << "\n";
    }
    atomic_write(config.output_dir / "scaling.csv", scaling.str());

    const auto missing = emit_figures(config.output_dir);
    for (const auto& m : missing) log_line("figures: " + m);

    for (const auto& r : report.results) {
        if (!r.completed || !r.accepted || !r.error.empty() || !r.core_ok) {
            ++report.failures;
        }
    }
    return report;
}

}  // namespace fkdisk
