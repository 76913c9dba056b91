#pragma once

#include <cmath>
#include <limits>

#include "fkdisk/field.hpp"
#include "fkdisk/operators.hpp"
#include "fkdisk/solver.hpp"

namespace fkdisk {

enum class NewtonStatus { Converged, NonConvergence, SingularJacobian };

struct NewtonOptions {
    double tol = 1e-10;   // absolute, on the max norm of the residual
    int max_iter = 25;    // full Newton steps
    double blowup = 80.0; // iterate magnitude treated as divergence
    // Fine or strongly anisotropic cells put the round-off floor of the
    // residual above tol; a residual below this cap that has stopped
    // decreasing counts as converged. The factor stays close to 1 because
    // near-fold Newton legitimately converges at a linear rate near 1/2.
    double stagnation_cap = 1e-7;
    double stagnation_factor = 0.9;
};

struct NewtonStats {
    NewtonStatus status = NewtonStatus::NonConvergence;
    int iterations = 0;
    double residual_norm = std::numeric_limits<double>::quiet_NaN();

    bool converged() const { return status == NewtonStatus::Converged; }
};

/// Full-step Newton on the stencil's unknown vector, in place.
inline NewtonStats newton_iterate(const SectorStencil& stencil, StencilSolver& solver,
                                  Eigen::VectorXd& u, double lambda,
                                  const NewtonOptions& opt = {}) {
    const double lam_sq = lambda * lambda;
    Eigen::VectorXd f, du;
    double prev_norm = std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
        stencil.residual(u, lam_sq, f);
        const double norm = f.lpNorm<Eigen::Infinity>();
        if (std::isfinite(norm) && norm <= opt.tol) {
            return {NewtonStatus::Converged, it, norm};
        }
        if (std::isfinite(norm) && norm <= opt.stagnation_cap &&
            norm > opt.stagnation_factor * prev_norm) {
            return {NewtonStatus::Converged, it, norm};  // round-off floor
        }
        prev_norm = norm;
        if (it == opt.max_iter || !std::isfinite(norm)) {
            return {NewtonStatus::NonConvergence, it, norm};
        }
        if (!solver.factorize(u, lam_sq)) {
            return {NewtonStatus::SingularJacobian, it, norm};
        }
        du = solver.step(f);
        if (!du.allFinite()) {
            return {NewtonStatus::SingularJacobian, it, norm};
        }
        u += du;
        if (u.lpNorm<Eigen::Infinity>() > opt.blowup) {
            return {NewtonStatus::NonConvergence, it + 1,
                    std::numeric_limits<double>::infinity()};
        }
    }
}

struct NewtonResult {
    SolutionField field;
    NewtonStats stats;
};

/// Solve the discrete problem at fixed lambda starting from `initial`.
/// NonConvergence signals a bad start or proximity to the fold;
/// SingularJacobian signals lambda at or beyond the critical value.
inline NewtonResult newton_solve(const SolutionField& initial, double lambda,
                                 double tol = 1e-10, int max_iter = 25) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (!initial.finite()) throw std::invalid_argument("initial field must be finite");
    NewtonResult result;
    result.field = initial;
    result.field.lambda = lambda;
    const SectorStencil stencil = SectorStencil::full(*initial.grid);
    StencilSolver solver(stencil);
    NewtonOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    result.stats = newton_iterate(stencil, solver, result.field.values, lambda, opt);
    return result;
}

}  // namespace fkdisk
