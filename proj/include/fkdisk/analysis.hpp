#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fkdisk/field.hpp"
#include "fkdisk/geometry.hpp"

namespace fkdisk {

enum class CoreStatus { Ok, NoCore };

/// Axisymmetric-core diagnostics of a near-critical solution.
///
/// rho_star is the outermost radius whose ring has angular variation below
/// the threshold; u_star the ring midrange there; lambda_sq_core the
/// effective parameter lambda^2 rho_star^2 e^{u_star} of the rescaled core
/// problem.
struct CoreAnalysis {
    CoreStatus status = CoreStatus::NoCore;
    double rho_star = 0.0;
    double u_star = 0.0;
    double lambda_sq_core = 0.0;
    double angular_variation_at_rho_star = 0.0;
    int rho_index = -1;

    bool ok() const { return status == CoreStatus::Ok; }
};

/// Effective parameter of the core problem after shifting by u_star and
/// rescaling radii by rho_star.
inline double core_parameter(double lambda_sq, double rho_star, double u_star) {
    return lambda_sq * rho_star * rho_star * std::exp(u_star);
}

/// Scan rings from the wall inward and return the first (outermost) radius
/// meeting the angular-variation criterion.
inline CoreAnalysis analyze_core(const SolutionField& field,
                                 double variation_threshold = 1e-4) {
    CoreAnalysis core;
    const PolarGrid& grid = *field.grid;
    for (int i = grid.radial_count() - 1; i >= 0; --i) {
        const double variation = field.angular_variation(i);
        if (variation < variation_threshold) {
            core.status = CoreStatus::Ok;
            core.rho_index = i;
            core.rho_star = grid.rho(i);
            core.u_star = field.ring_midrange(i);
            core.angular_variation_at_rho_star = variation;
            core.lambda_sq_core =
                core_parameter(field.lambda_sq(), core.rho_star, core.u_star);
            return core;
        }
    }
    return core;  // NoCore: even the innermost ring varies too much
}

/// Wall-layer thickness 1 - rho_star; comparable to one wall period 2*pi/N.
inline double boundary_layer_thickness(const CoreAnalysis& core) {
    if (!core.ok()) {
        throw std::invalid_argument("boundary layer thickness needs a resolved core");
    }
    return 1.0 - core.rho_star;
}

inline double boundary_layer_thickness(const SolutionField& field,
                                       double variation_threshold = 1e-4) {
    return boundary_layer_thickness(analyze_core(field, variation_threshold));
}

/// Power-law fit lambda_cr^2 = S * alpha^t over estimates at one segment
/// count, as a linear least squares in log-log coordinates.
struct ScalingFit {
    int segments = 0;
    double S = 0.0;
    double t = 0.0;
    double alpha_low = 0.0;
    double alpha_high = 0.0;
    double relative_fit_residual = 0.0;  // rms residual of ln(lambda_cr^2)
};

inline ScalingFit fit_scaling_law(const std::vector<std::pair<double, double>>& estimates,
                                  int segments) {
    if (estimates.size() < 4) {
        throw std::invalid_argument("scaling fit needs at least 4 estimates");
    }
    double lo = estimates.front().first, hi = lo;
    for (const auto& [alpha, lam_sq] : estimates) {
        if (alpha <= 0.0 || lam_sq <= 0.0) {
            throw std::invalid_argument("scaling fit needs positive alpha and lambda_cr^2");
        }
        lo = std::min(lo, alpha);
        hi = std::max(hi, alpha);
    }
    if (hi < 10.0 * lo) {
        throw std::invalid_argument("scaling fit needs alpha spanning at least one decade");
    }
    const auto count = estimates.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [alpha, lam_sq] : estimates) {
        const double x = std::log(alpha);
        const double y = std::log(lam_sq);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = count * sxx - sx * sx;
    const double slope = (count * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / count;

    ScalingFit fit;
    fit.segments = segments;
    fit.S = std::exp(intercept);
    fit.t = slope;
    fit.alpha_low = lo;
    fit.alpha_high = hi;
    double acc = 0.0;
    for (const auto& [alpha, lam_sq] : estimates) {
        const double r = std::log(lam_sq) - (intercept + slope * std::log(alpha));
        acc += r * r;
    }
    fit.relative_fit_residual = std::sqrt(acc / count);
    return fit;
}

/// Closed-form solution of the fully conducting problem, parameterized by
/// B > 0: lambda^2 = 8B/(1+B)^2 and u(rho) = 2 ln((1+B)/(1+B rho^2)).
/// The subcritical branch is B < 1; B = 1 is the fold.
struct ClassicalSolution {
    double B = 0.0;
    double lambda_sq = 0.0;

    double operator()(double rho) const {
        return 2.0 * (std::log1p(B) - std::log1p(B * rho * rho));
    }
    double center_value() const { return 2.0 * std::log1p(B); }
};

inline ClassicalSolution classical_solution(double B) {
    if (!(B > 0.0)) throw std::invalid_argument("B must be > 0");
    ClassicalSolution sol;
    sol.B = B;
    sol.lambda_sq = 8.0 * B / ((1.0 + B) * (1.0 + B));
    return sol;
}

/// Subcritical branch parameter for a given lambda^2 < 2, found by bisection
/// on 8B/(1+B)^2 (increasing on [0, 1]).
inline double classical_branch_parameter(double lambda_sq) {
    if (!(lambda_sq >= 0.0 && lambda_sq < 2.0)) {
        throw std::invalid_argument("subcritical branch needs lambda^2 in [0, 2)");
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double val = 8.0 * mid / ((1.0 + mid) * (1.0 + mid));
        (val < lambda_sq ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Reference solution of the axisymmetric problem
///   (1/R) d/dR (R dv/dR) + Lambda^2 e^v = 0,  v(1) = boundary_value,
/// regular at R = 0, on a fine cell-centered mesh.
struct RadialProfile {
    double lambda_sq = 0.0;
    double boundary_value = 0.0;
    std::vector<double> radius;  // cell centers in (0, 1)
    std::vector<double> v;

    /// Piecewise-linear evaluation; even extension near the origin.
    double value_at(double r) const {
        const auto n = radius.size();
        if (r <= radius.front()) {
            // v is even in R: interpolate in r^2 through the first two cells.
            const double r0 = radius[0], r1 = radius[1];
            const double w = (r * r - r0 * r0) / (r1 * r1 - r0 * r0);
            return v[0] + w * (v[1] - v[0]);
        }
        if (r >= radius.back()) {
            // Linear through the boundary value at R = 1.
            const double rn = radius.back();
            const double w = (r - rn) / (1.0 - rn);
            return v.back() + w * (boundary_value - v.back());
        }
        const auto it = std::upper_bound(radius.begin(), radius.end(), r);
        const auto k = static_cast<std::size_t>(it - radius.begin());
        const double w = (r - radius[k - 1]) / (radius[k] - radius[k - 1]);
        return v[k - 1] + w * (v[k] - v[k - 1]);
    }
};

/// 1D Newton with a tridiagonal (Thomas) solve. Independent of the 2D path:
/// used to validate that near-critical cores reduce to the classical
/// axisymmetric problem.
inline RadialProfile solve_radial(double lambda_sq, double boundary_value = 0.0,
                                  int n_r = 4096, double tol = 1e-12,
                                  int max_iter = 50) {
    if (!(lambda_sq < 2.0)) {
        throw std::invalid_argument("radial reference solve requires lambda^2 < 2");
    }
    if (lambda_sq < 0.0) throw std::invalid_argument("lambda^2 must be >= 0");
    if (n_r < 8) throw std::invalid_argument("radial mesh too coarse");

    const double h = 1.0 / n_r;
    const auto count = static_cast<std::size_t>(n_r);
    std::vector<double> radius(count), c_in(count), c_out(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double r = (static_cast<double>(i) + 0.5) * h;
        radius[i] = r;
        c_in[i] = (r - 0.5 * h) / (r * h * h);
        c_out[i] = (r + 0.5 * h) / (r * h * h);
    }

    std::vector<double> v(count, boundary_value);
    std::vector<double> f(count), diag(count), lower(count), upper(count), work(count);

    double prev_norm = std::numeric_limits<double>::infinity();
    for (int it = 0;; ++it) {
        // Residual in difference form; wall ghost linear through the
        // boundary value: ghost - v = 2 (bv - v_last).
        double norm = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            double acc = lambda_sq * std::exp(v[i]);
            if (i > 0) acc += c_in[i] * (v[i - 1] - v[i]);
            if (i + 1 < count) {
                acc += c_out[i] * (v[i + 1] - v[i]);
            } else {
                acc += c_out[i] * 2.0 * (boundary_value - v[i]);
            }
            f[i] = acc;
            norm = std::max(norm, std::abs(acc));
        }
        // Fine meshes put the round-off floor of the residual above tol;
        // accept a plateaued residual below 1e-7.
        if (norm <= tol || (norm <= 1e-7 && norm > 0.9 * prev_norm)) break;
        prev_norm = norm;
        if (it >= max_iter) {
            throw std::runtime_error("radial reference solve did not converge");
        }
        for (std::size_t i = 0; i < count; ++i) {
            lower[i] = c_in[i];
            upper[i] = c_out[i];
            diag[i] = -(c_in[i] + c_out[i]) + lambda_sq * std::exp(v[i]);
        }
        diag[count - 1] = -(c_in[count - 1] + 2.0 * c_out[count - 1]) +
                          lambda_sq * std::exp(v[count - 1]);
        // Thomas elimination of J dv = -f.
        work[0] = upper[0] / diag[0];
        f[0] = -f[0] / diag[0];
        for (std::size_t i = 1; i < count; ++i) {
            const double m = diag[i] - lower[i] * work[i - 1];
            if (m == 0.0) throw std::runtime_error("radial solve: zero pivot");
            work[i] = upper[i] / m;
            f[i] = (-f[i] - lower[i] * f[i - 1]) / m;
        }
        for (std::size_t i = count - 1; i-- > 0;) {
            f[i] -= work[i] * f[i + 1];
        }
        for (std::size_t i = 0; i < count; ++i) v[i] += f[i];
    }

    RadialProfile profile;
    profile.lambda_sq = lambda_sq;
    profile.boundary_value = boundary_value;
    profile.radius = std::move(radius);
    profile.v = std::move(v);
    return profile;
}

/// Material and kinetic constants of the dimensional problem.
struct PhysicalScaling {
    double T0 = 0.0;        // ambient temperature [K]
    double E = 0.0;         // activation energy [J/mol]
    double R_gas = 0.0;     // universal gas constant [J/(mol K)]
    double kappa = 0.0;     // thermal diffusivity [m^2/s]
    double c = 0.0;         // volumetric heat capacity [J/(m^3 K)]
    double Q = 0.0;         // heat of reaction per unit mass [J/kg]
    double sigma_T0 = 0.0;  // pre-exponential rate at T0 [1/s]

    void validate() const {
        if (!(T0 > 0 && E > 0 && R_gas > 0 && kappa > 0 && c > 0 && Q > 0 &&
              sigma_T0 > 0)) {
            throw std::invalid_argument("physical scaling requires positive fields");
        }
    }
};

/// Characteristic length l such that lambda = r0 / l.
inline double characteristic_length(const PhysicalScaling& s) {
    s.validate();
    return std::sqrt(std::exp(s.E / (s.R_gas * s.T0)) * s.kappa * s.R_gas * s.T0 *
                     s.T0 * s.c / (s.Q * s.E * s.sigma_T0));
}

inline double lambda_from_physical(const PhysicalScaling& s, double r0) {
    if (!(r0 > 0)) throw std::invalid_argument("r0 must be positive");
    return r0 / characteristic_length(s);
}

/// Critical vessel radius for a given critical lambda.
inline double critical_radius(const PhysicalScaling& s, double lambda_cr) {
    if (!(lambda_cr > 0)) throw std::invalid_argument("lambda_cr must be positive");
    return lambda_cr * characteristic_length(s);
}

}  // namespace fkdisk
