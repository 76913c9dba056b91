#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>

#include "fkdisk/geometry.hpp"

namespace fkdisk {

/// Reduced temperature u on a polar grid at a given lambda. Values are
/// stored theta-major (radial index fastest).
struct SolutionField {
    std::shared_ptr<const PolarGrid> grid;
    Eigen::VectorXd values;
    double lambda = 0.0;

    SolutionField() = default;

    SolutionField(std::shared_ptr<const PolarGrid> g, double lam)
        : grid(std::move(g)),
          values(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid->size()))),
          lambda(lam) {}

    static SolutionField zero(std::shared_ptr<const PolarGrid> g, double lam = 0.0) {
        return SolutionField(std::move(g), lam);
    }

    double lambda_sq() const { return lambda * lambda; }

    double operator()(int i, int j) const {
        return values[static_cast<Eigen::Index>(grid->index(i, j))];
    }
    double& operator()(int i, int j) {
        return values[static_cast<Eigen::Index>(grid->index(i, j))];
    }

    /// Branch norm: max over nodes. Coincides with the center value for
    /// axisymmetric solutions and is monotone along the subcritical branch.
    double max_value() const { return values.size() == 0 ? 0.0 : values.maxCoeff(); }

    bool finite() const { return values.allFinite(); }

    /// Max angular variation over the ring at radial index i.
    double angular_variation(int i) const {
        const int nt = grid->angular_count();
        double lo = (*this)(i, 0), hi = lo;
        for (int j = 1; j < nt; ++j) {
            const double v = (*this)(i, j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return hi - lo;
    }

    /// Midrange of the ring at radial index i.
    double ring_midrange(int i) const {
        const int nt = grid->angular_count();
        double lo = (*this)(i, 0), hi = lo;
        for (int j = 1; j < nt; ++j) {
            const double v = (*this)(i, j);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        return 0.5 * (lo + hi);
    }
};

}  // namespace fkdisk
