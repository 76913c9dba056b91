#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fkdisk/analysis.hpp"
#include "fkdisk/continuation.hpp"
#include "fkdisk/field.hpp"
#include "fkdisk/geometry.hpp"

namespace fkdisk {

inline constexpr int data_schema_version = 1;

/// Fixed-width significant-digit formatting for data files: '.' decimal
/// separator, no grouping, 12 significant digits.
inline std::string format_value(double v, int significant = 12) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", significant, v);
    return std::string(buf);
}

/// Write-then-rename so partially written files never appear under the
/// final name.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---- boundary specs ----

inline std::string kind_name(BoundaryKind kind) {
    switch (kind) {
        case BoundaryKind::FullDirichlet: return "full_dirichlet";
        case BoundaryKind::SingleArc: return "single_arc";
        case BoundaryKind::Periodic: return "periodic";
    }
    return "full_dirichlet";
}

inline BoundaryKind kind_from_name(const std::string& name) {
    if (name == "full_dirichlet") return BoundaryKind::FullDirichlet;
    if (name == "single_arc") return BoundaryKind::SingleArc;
    if (name == "periodic") return BoundaryKind::Periodic;
    throw std::invalid_argument("unknown boundary kind: " + name);
}

inline nlohmann::json boundary_spec_to_json(const BoundarySpec& spec) {
    nlohmann::json j;
    j["kind"] = kind_name(spec.kind);
    j["alpha"] = spec.alpha.str();
    if (spec.kind == BoundaryKind::Periodic) j["segments"] = spec.segments;
    return j;
}

inline BoundarySpec boundary_spec_from_json(const nlohmann::json& j) {
    const BoundaryKind kind = kind_from_name(j.at("kind").get<std::string>());
    Fraction alpha(1, 1);
    if (j.contains("alpha")) {
        const auto& a = j.at("alpha");
        alpha = a.is_string() ? Fraction::parse(a.get<std::string>())
                              : Fraction::parse(nlohmann::json(a).dump());
    }
    switch (kind) {
        case BoundaryKind::FullDirichlet: return BoundarySpec::full_dirichlet();
        case BoundaryKind::SingleArc: return BoundarySpec::single_arc(alpha);
        case BoundaryKind::Periodic:
            return BoundarySpec::periodic(j.at("segments").get<int>(), alpha);
    }
    throw std::invalid_argument("unreachable boundary kind");
}

// ---- fields ----

/// Header line with the grid shape and lambda, then (rho, theta, u) rows in
/// theta-major order.
inline std::string field_to_csv(const SolutionField& field) {
    const PolarGrid& grid = *field.grid;
    std::ostringstream out;
    out << "n_r,n_theta,lambda\n"
        << grid.radial_count() << ',' << grid.angular_count() << ','
        << format_value(field.lambda) << "\n";
    out << "rho,theta,u\n";
    for (int j = 0; j < grid.angular_count(); ++j) {
        for (int i = 0; i < grid.radial_count(); ++i) {
            out << format_value(grid.rho(i)) << ',' << format_value(grid.theta(j))
                << ',' << format_value(field(i, j)) << "\n";
        }
    }
    return out.str();
}

// ---- traces ----

inline std::string trace_to_csv(const ContinuationTrace& trace) {
    std::ostringstream out;
    out << "lambda,lambda_sq,norm,newton_iters\n";
    for (const TracePoint& pt : trace.points) {
        out << format_value(pt.lambda) << ',' << format_value(pt.lambda * pt.lambda)
            << ',' << format_value(pt.norm) << ',' << pt.newton_iters << "\n";
    }
    return out.str();
}

// ---- fit records ----

inline const char* fold_status_name(FoldFitStatus s) {
    switch (s) {
        case FoldFitStatus::Accepted: return "accepted";
        case FoldFitStatus::NotAFold: return "not_a_fold";
        case FoldFitStatus::PoorFit: return "poor_fit";
    }
    return "not_a_fold";
}

inline const char* termination_name(TraceTermination t) {
    switch (t) {
        case TraceTermination::FoldProximity: return "fold_proximity";
        case TraceTermination::StepFloor: return "step_floor";
        case TraceTermination::MaxSteps: return "max_steps";
        case TraceTermination::Diverged: return "diverged";
    }
    return "diverged";
}

inline nlohmann::json fold_fit_to_json(const FoldFit& fit) {
    nlohmann::json j;
    j["schema_version"] = data_schema_version;
    j["lambda_cr_sq"] = fit.lambda_cr_sq;
    j["C"] = fit.C;
    j["u0"] = fit.u0;
    j["rms_relative_residual"] = fit.rms_relative_residual;
    j["status"] = fold_status_name(fit.status);
    j["points_used"] = fit.points_used;
    return j;
}

inline nlohmann::json critical_estimate_to_json(const BoundarySpec& spec,
                                                const CriticalEstimate& est) {
    nlohmann::json j;
    j["schema_version"] = data_schema_version;
    j["spec"] = boundary_spec_to_json(spec);
    j["alpha_requested"] = spec.alpha.str();
    nlohmann::json per_n = nlohmann::json::array();
    for (const PerGridEstimate& e : est.per_n) {
        nlohmann::json row;
        row["n"] = e.n;
        row["n_theta"] = e.n_theta;
        row["lambda_cr_sq"] = e.lambda_cr_sq;
        row["fold_rms"] = e.fold_rms;
        row["alpha_effective"] = e.alpha_effective.str();
        row["fold_status"] = fold_status_name(e.fold_status);
        row["termination"] = termination_name(e.termination);
        per_n.push_back(row);
    }
    j["per_n"] = per_n;
    if (!est.per_n.empty()) {
        j["alpha_effective"] = est.per_n.back().alpha_effective.str();
    }
    j["extrapolated_lambda_cr_sq"] = est.extrapolated_lambda_cr_sq;
    j["slope_b"] = est.slope_b;
    j["fit_quality"] = est.fit_quality;
    j["status"] = est.accepted() ? "accepted" : "retry_cap_exceeded";
    j["retries_used"] = est.retries_used;
    return j;
}

inline nlohmann::json core_analysis_to_json(const CoreAnalysis& core) {
    nlohmann::json j;
    j["schema_version"] = data_schema_version;
    j["status"] = core.ok() ? "ok" : "no_core";
    if (core.ok()) {
        j["rho_star"] = core.rho_star;
        j["u_star"] = core.u_star;
        j["Lambda_sq"] = core.lambda_sq_core;
        j["angular_variation_at_rho_star"] = core.angular_variation_at_rho_star;
        j["boundary_layer_thickness"] = 1.0 - core.rho_star;
    }
    return j;
}

}  // namespace fkdisk
