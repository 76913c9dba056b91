#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "fkdisk/newton.hpp"

namespace fkdisk {

/// Stepping schedule for natural continuation in lambda.
struct StepPolicy {
    double initial_step = 0.05;        // lambda step away from the fold
    double step_floor = 1e-6;          // termination threshold on the lambda step
    double step_growth = 1.5;          // recovery factor after easy successes
    double norm_step_fraction = 0.005; // fold-phase target increment of ||u||
    int max_steps = 1000;             // accepted-point budget
    double newton_tol = 1e-10;
    int newton_max_iter = 25;
};

enum class TraceTermination { FoldProximity, StepFloor, MaxSteps, Diverged };

struct TracePoint {
    double lambda = 0.0;
    double norm = 0.0;   // max over nodes of u
    int newton_iters = 0;
    std::shared_ptr<const SolutionField> checkpoint;  // kept for the last point
};

struct ContinuationTrace {
    std::vector<TracePoint> points;
    TraceTermination termination = TraceTermination::Diverged;

    const std::shared_ptr<const SolutionField>& final_field() const {
        static const std::shared_ptr<const SolutionField> none;
        for (auto it = points.rbegin(); it != points.rend(); ++it) {
            if (it->checkpoint) return it->checkpoint;
        }
        return none;
    }
};

namespace detail {

/// Copy a sector-periodic solution vector onto the full grid.
inline SolutionField replicate_to_full(std::shared_ptr<const PolarGrid> grid,
                                       const Eigen::VectorXd& sector_values,
                                       double lambda) {
    SolutionField field(grid, lambda);
    const int n_r = grid->radial_count();
    const int p = grid->nodes_per_sector();
    for (int j = 0; j < grid->angular_count(); ++j) {
        const int local = j % p;
        for (int i = 0; i < n_r; ++i) {
            field.values[static_cast<Eigen::Index>(grid->index(i, j))] =
                sector_values[static_cast<Eigen::Index>(local) * n_r + i];
        }
    }
    return field;
}

}  // namespace detail

/// Trace the solution branch u(lambda) from lambda = 0 upward by natural
/// continuation, warm-starting each Newton solve from the previous solution.
///
/// Two stepping phases: fixed lambda steps (halved after failures, regrown
/// after successes) until the first Newton failure, then norm-targeted steps
/// predicted through the secant slope dlambda/d||u||, so the points feeding
/// the fold fit are spaced evenly in ||u||. Terminates when the lambda step
/// falls below the floor.
///
/// The solve runs on one sector of the wall structure with periodic wrap;
/// the branch through u = 0 is sector-periodic, so this is algebraically the
/// full-disk iteration restricted to one period.
inline ContinuationTrace trace_branch(std::shared_ptr<const PolarGrid> grid,
                                      const StepPolicy& policy = {}) {
    const SectorStencil stencil = SectorStencil::reduced(*grid);
    StencilSolver solver(stencil);
    NewtonOptions nopt;
    nopt.tol = policy.newton_tol;
    nopt.max_iter = policy.newton_max_iter;

    ContinuationTrace trace;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(stencil.size());
    double lambda = 0.0;

    // u = 0 solves lambda = 0 exactly.
    trace.points.push_back({0.0, 0.0, 0, nullptr});

    double step = policy.initial_step;
    std::optional<double> norm_step;  // set once the fold phase begins
    bool fold_evidence = false;

    const auto finish = [&](TraceTermination term) {
        trace.termination = term;
        if (!trace.points.empty()) {
            trace.points.back().checkpoint = std::make_shared<SolutionField>(
                detail::replicate_to_full(grid, u, lambda));
        }
        return trace;
    };

    while (static_cast<int>(trace.points.size()) < policy.max_steps) {
        double attempt = step;
        if (norm_step && trace.points.size() >= 2) {
            const auto& a = trace.points[trace.points.size() - 2];
            const auto& b = trace.points.back();
            const double dnorm = std::max(b.norm - a.norm, 1e-300);
            const double slope = (b.lambda - a.lambda) / dnorm;
            attempt = std::min(slope * *norm_step, policy.initial_step);
        }
        if (!(attempt >= policy.step_floor)) {
            return finish(fold_evidence ? TraceTermination::FoldProximity
                                        : TraceTermination::StepFloor);
        }

        Eigen::VectorXd candidate = u;
        const NewtonStats stats =
            newton_iterate(stencil, solver, candidate, lambda + attempt, nopt);
        if (stats.converged()) {
            lambda += attempt;
            u = std::move(candidate);
            trace.points.push_back({lambda, u.size() ? u.maxCoeff() : 0.0,
                                    stats.iterations, nullptr});
            if (!norm_step) step = std::min(step * policy.step_growth, policy.initial_step);
        } else {
            fold_evidence = true;
            if (!norm_step) {
                if (trace.points.size() >= 3) {
                    norm_step = std::max(trace.points.back().norm, 0.1) *
                                policy.norm_step_fraction;
                } else {
                    step *= 0.5;
                    if (step < policy.step_floor) {
                        return finish(TraceTermination::Diverged);
                    }
                }
            } else {
                *norm_step *= 0.5;
            }
        }
    }
    return finish(TraceTermination::MaxSteps);
}

enum class FoldFitStatus { Accepted, NotAFold, PoorFit };

/// Parabolic fold extrapolation fitted to the trailing trace points:
/// lambda_cr^2 - lambda^2 = C (||u|| - u0)^2.
struct FoldFit {
    double lambda_cr_sq = 0.0;
    double C = 0.0;
    double u0 = 0.0;
    double rms_relative_residual = 0.0;
    FoldFitStatus status = FoldFitStatus::NotAFold;
    int points_used = 0;

    bool accepted() const { return status == FoldFitStatus::Accepted; }
};

/// Least-squares fit of lambda^2 as a quadratic in ||u|| over the last
/// `window` points. The quadratic is fitted in norm-centered coordinates for
/// conditioning; its vertex gives lambda_cr^2 and u0, and C is the negated
/// curvature. Requires downward curvature (a fold), and an rms relative
/// residual within `accept_rms`.
inline FoldFit fit_fold(const ContinuationTrace& trace, int window = 10,
                        double accept_rms = 1e-4) {
    const int total = static_cast<int>(trace.points.size());
    if (total < window) {
        throw std::invalid_argument("fold fit needs at least " +
                                    std::to_string(window) + " trace points");
    }
    const int start = total - window;
    Eigen::VectorXd norm(window), lam_sq(window);
    for (int k = 0; k < window; ++k) {
        norm[k] = trace.points[static_cast<std::size_t>(start + k)].norm;
        lam_sq[k] = trace.points[static_cast<std::size_t>(start + k)].lambda *
                    trace.points[static_cast<std::size_t>(start + k)].lambda;
    }
    const double center = norm.mean();
    Eigen::MatrixXd design(window, 3);
    for (int k = 0; k < window; ++k) {
        const double s = norm[k] - center;
        design(k, 0) = 1.0;
        design(k, 1) = s;
        design(k, 2) = s * s;
    }
    const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(lam_sq);
    const double q0 = coef[0], q1 = coef[1], q2 = coef[2];

    FoldFit fit;
    fit.points_used = window;
    if (!(q2 < 0.0)) {
        fit.status = FoldFitStatus::NotAFold;
        return fit;
    }
    fit.lambda_cr_sq = q0 - q1 * q1 / (4.0 * q2);  // vertex value, shift-invariant
    fit.u0 = center - q1 / (2.0 * q2);
    fit.C = -q2;

    double acc = 0.0;
    for (int k = 0; k < window; ++k) {
        const double s = norm[k] - center;
        const double model = q0 + q1 * s + q2 * s * s;
        const double rel = (lam_sq[k] - model) / fit.lambda_cr_sq;
        acc += rel * rel;
    }
    fit.rms_relative_residual = std::sqrt(acc / window);
    fit.status = fit.rms_relative_residual <= accept_rms ? FoldFitStatus::Accepted
                                                         : FoldFitStatus::PoorFit;
    return fit;
}

/// Least-squares fit of values(n) = a + b/n; rel_rms is the rms residual
/// relative to |a|.
struct InverseLinearFit {
    double a = 0.0;
    double b = 0.0;
    double rel_rms = 0.0;
};

inline InverseLinearFit fit_linear_in_inverse_n(const std::vector<int>& ns,
                                                const std::vector<double>& values) {
    if (ns.size() != values.size() || ns.size() < 2) {
        throw std::invalid_argument("inverse-n fit needs matching lists of >= 2 points");
    }
    const auto count = static_cast<Eigen::Index>(ns.size());
    Eigen::MatrixXd design(count, 2);
    Eigen::VectorXd rhs(count);
    for (Eigen::Index k = 0; k < count; ++k) {
        design(k, 0) = 1.0;
        design(k, 1) = 1.0 / static_cast<double>(ns[static_cast<std::size_t>(k)]);
        rhs[k] = values[static_cast<std::size_t>(k)];
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
    const Eigen::VectorXd resid = rhs - design * coef;
    InverseLinearFit fit;
    fit.a = coef[0];
    fit.b = coef[1];
    fit.rel_rms = std::sqrt(resid.squaredNorm() / static_cast<double>(count)) /
                  std::abs(coef[0]);
    return fit;
}

enum class EstimateStatus { Accepted, RetryCapExceeded };

struct PerGridEstimate {
    int n = 0;
    int n_theta = 0;
    double lambda_cr_sq = 0.0;
    double fold_rms = 0.0;
    Fraction alpha_effective{1, 1};
    FoldFitStatus fold_status = FoldFitStatus::NotAFold;
    TraceTermination termination = TraceTermination::Diverged;
};

/// Critical estimate at one boundary spec: per-grid fold values plus the
/// 1/n extrapolation lambda_cr^2(n) = a + b/n.
struct CriticalEstimate {
    std::vector<PerGridEstimate> per_n;
    double extrapolated_lambda_cr_sq = 0.0;  // a
    double slope_b = 0.0;                    // b
    double fit_quality = 0.0;                // relative rms residual of the linear fit
    EstimateStatus status = EstimateStatus::RetryCapExceeded;
    int retries_used = 0;
    std::shared_ptr<const SolutionField> finest_field;  // near-critical, largest n

    bool accepted() const { return status == EstimateStatus::Accepted; }
};

struct ExtrapolationOptions {
    std::vector<int> n_list = {64, 128, 256};
    double accept_rel_residual = 1e-3;  // on the linear fit
    int retry_cap = 2;                  // n-list doublings
    double fold_accept_rms = 1e-4;
    int fold_window = 10;
    StepPolicy policy;
    /// Called once per traced grid size (including retries).
    std::function<void(int, const ContinuationTrace&)> trace_observer;
};

/// Run trace + fold fit at each grid size, fit a + b/n, and double the grid
/// sizes when the linear fit (or any fold fit) is unsatisfactory.
inline CriticalEstimate extrapolate_in_n(const BoundarySpec& spec,
                                         const ExtrapolationOptions& opts = {}) {
    if (opts.n_list.size() < 3) {
        throw std::invalid_argument("extrapolation needs at least 3 grid sizes");
    }
    for (std::size_t k = 1; k < opts.n_list.size(); ++k) {
        if (opts.n_list[k] <= opts.n_list[k - 1]) {
            throw std::invalid_argument("grid sizes must be strictly increasing");
        }
    }

    struct PerGridData {
        PerGridEstimate estimate;
        std::shared_ptr<const SolutionField> field;
    };
    std::map<int, PerGridData> cache;

    // Angular resolution scales with n so the grid sequence refines
    // self-similarly; otherwise the critical values do not follow a + b/n.
    const int n_base = opts.n_list.front();
    const int p_base = build_grid(n_base, spec).nodes_per_sector();

    const auto run_n = [&](int n) -> const PerGridData& {
        auto found = cache.find(n);
        if (found != cache.end()) return found->second;
        const auto scaled = static_cast<std::int64_t>(p_base) * n;
        const int min_p = static_cast<int>(detail::ceil_div64(scaled, n_base));
        auto grid = std::make_shared<const PolarGrid>(build_grid(n, spec, min_p));
        ContinuationTrace trace = trace_branch(grid, opts.policy);
        if (opts.trace_observer) opts.trace_observer(n, trace);
        PerGridData data;
        data.estimate.n = n;
        data.estimate.n_theta = grid->angular_count();
        data.estimate.alpha_effective = grid->alpha_effective();
        data.estimate.termination = trace.termination;
        data.field = trace.final_field();
        if (static_cast<int>(trace.points.size()) >= opts.fold_window) {
            const FoldFit fit = fit_fold(trace, opts.fold_window, opts.fold_accept_rms);
            data.estimate.lambda_cr_sq = fit.lambda_cr_sq;
            data.estimate.fold_rms = fit.rms_relative_residual;
            data.estimate.fold_status = fit.status;
        } else {
            data.estimate.fold_status = FoldFitStatus::NotAFold;
        }
        return cache.emplace(n, std::move(data)).first->second;
    };

    CriticalEstimate result;
    std::vector<int> n_list = opts.n_list;
    for (int attempt = 0; attempt <= opts.retry_cap; ++attempt) {
        result.retries_used = attempt;
        result.per_n.clear();
        bool folds_ok = true;
        for (int n : n_list) {
            const PerGridData& data = run_n(n);
            result.per_n.push_back(data.estimate);
            folds_ok = folds_ok && data.estimate.fold_status == FoldFitStatus::Accepted;
        }
        if (folds_ok) {
            std::vector<double> values;
            values.reserve(result.per_n.size());
            for (const auto& e : result.per_n) values.push_back(e.lambda_cr_sq);
            const InverseLinearFit fit = fit_linear_in_inverse_n(n_list, values);
            result.extrapolated_lambda_cr_sq = fit.a;
            result.slope_b = fit.b;
            result.fit_quality = fit.rel_rms;
            result.finest_field = cache.at(n_list.back()).field;
            if (fit.rel_rms <= opts.accept_rel_residual) {
                result.status = EstimateStatus::Accepted;
                return result;
            }
        }
        if (attempt < opts.retry_cap) {
            for (int& n : n_list) n *= 2;
        }
    }
    result.status = EstimateStatus::RetryCapExceeded;
    return result;
}

}  // namespace fkdisk
