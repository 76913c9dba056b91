#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <vector>

#include "fkdisk/field.hpp"
#include "fkdisk/geometry.hpp"

namespace fkdisk {

/// Sparse matrix as an explicit (row, col, value) list in a fixed,
/// deterministic order: rows ascending, and within a row the stencil legs in
/// the order radial-in, radial-out, theta-back, theta-forward, diagonal.
struct SparseOperator {
    Eigen::Index dimension = 0;
    std::vector<Eigen::Triplet<double>> entries;

    Eigen::SparseMatrix<double> matrix() const {
        Eigen::SparseMatrix<double> m(dimension, dimension);
        m.setFromTriplets(entries.begin(), entries.end());
        return m;
    }
};

/// Finite-difference stencil for Delta u + lambda^2 e^u on an angular span of
/// `cols` columns covering one period of the wall structure. The full disk is
/// the special case period = 2*pi. Angular index arithmetic wraps mod cols.
///
/// Radial part, cell-centered flux form (1/rho) d/drho (rho du/drho) on the
/// given face partition: coefficients f_i / (rho_i w_i (rho_i - rho_{i-1}))
/// and f_{i+1} / (rho_i w_i (rho_{i+1} - rho_i)). The innermost coefficient
/// vanishes identically (zero-radius face), so the origin needs no special
/// equation. Wall ghosts mirror the last cell: conducting u_g = -u_last
/// (zero wall value under linear interpolation), insulated u_g = u_last.
class SectorStencil {
public:
    SectorStencil(std::vector<double> faces, int cols, double dtheta,
                  std::vector<bool> conducting)
        : n_r_(static_cast<int>(faces.size()) - 1),
          cols_(cols),
          dtheta_(dtheta),
          conducting_(std::move(conducting)) {
        rho_.resize(n_r_);
        width_.resize(n_r_);
        c_in_.resize(n_r_);
        c_out_.resize(n_r_);
        c_th_.resize(n_r_);
        for (int i = 0; i < n_r_; ++i) {
            rho_[i] = 0.5 * (faces[i] + faces[i + 1]);
            width_[i] = faces[i + 1] - faces[i];
        }
        for (int i = 0; i < n_r_; ++i) {
            const double delta_in = i > 0 ? rho_[i] - rho_[i - 1] : 1.0;  // f_0 = 0
            const double delta_out =
                i + 1 < n_r_ ? rho_[i + 1] - rho_[i] : width_[i];  // mirrored ghost
            c_in_[i] = faces[i] / (rho_[i] * width_[i] * delta_in);
            c_out_[i] = faces[i + 1] / (rho_[i] * width_[i] * delta_out);
            c_th_[i] = 1.0 / (rho_[i] * rho_[i] * dtheta * dtheta);
        }
    }

    /// Uniform radial partition of the unit interval.
    SectorStencil(int n_r, int cols, double dtheta, std::vector<bool> conducting)
        : SectorStencil(detail_uniform_faces(n_r), cols, dtheta, std::move(conducting)) {}

    /// Discrete problem on the whole disk (the operator the public residual
    /// and jacobian contracts are written against).
    static SectorStencil full(const PolarGrid& grid) {
        std::vector<bool> mask(grid.angular_count());
        for (int j = 0; j < grid.angular_count(); ++j) mask[j] = grid.wall_conducting(j);
        return SectorStencil(grid.radial_faces(), grid.angular_count(),
                             grid.angular_spacing(), std::move(mask));
    }

    /// Discrete problem on one sector with periodic wrap. For sector-periodic
    /// solutions this is algebraically identical to the full problem restricted
    /// to one period; the angular spacing is unchanged.
    static SectorStencil reduced(const PolarGrid& grid) {
        const int p = grid.nodes_per_sector();
        std::vector<bool> mask(p);
        for (int j = 0; j < p; ++j) mask[j] = grid.wall_conducting(j);
        return SectorStencil(grid.radial_faces(), p, grid.angular_spacing(),
                             std::move(mask));
    }

    int radial_count() const { return n_r_; }
    int cols() const { return cols_; }
    Eigen::Index size() const {
        return static_cast<Eigen::Index>(n_r_) * static_cast<Eigen::Index>(cols_);
    }
    double rho(int i) const { return rho_[i]; }
    bool conducting(int j) const { return conducting_[static_cast<std::size_t>(j)]; }

    Eigen::Index index(int i, int j) const {
        return static_cast<Eigen::Index>(j) * n_r_ + i;
    }

    /// F(u) = Delta_h u + lambda^2 e^u, evaluated in difference form: node
    /// differences are taken before scaling by the stencil coefficients, so
    /// the round-off floor tracks the continuum magnitudes instead of the
    /// (large) inner-ring coefficients, and axisymmetric data yields an
    /// exactly axisymmetric residual.
    void residual(const Eigen::VectorXd& u, double lambda_sq, Eigen::VectorXd& out) const {
        out.resize(size());
        for (int j = 0; j < cols_; ++j) {
            const int jp = j + 1 == cols_ ? 0 : j + 1;
            const int jm = j == 0 ? cols_ - 1 : j - 1;
            const double* col = u.data() + index(0, j);
            const double* colp = u.data() + index(0, jp);
            const double* colm = u.data() + index(0, jm);
            double* dst = out.data() + index(0, j);
            for (int i = 0; i < n_r_; ++i) {
                const double uc = col[i];
                double acc = lambda_sq * std::exp(uc);
                if (i > 0) acc += c_in_[i] * (col[i - 1] - uc);
                if (i < n_r_ - 1) {
                    acc += c_out_[i] * (col[i + 1] - uc);
                } else if (conducting_[static_cast<std::size_t>(j)]) {
                    acc += c_out_[i] * (-2.0 * uc);  // ghost - u = -2u
                }                                     // insulated: ghost - u = 0
                acc += c_th_[i] * ((colp[i] - uc) + (colm[i] - uc));
                dst[i] = acc;
            }
        }
    }

    Eigen::VectorXd residual(const Eigen::VectorXd& u, double lambda_sq) const {
        Eigen::VectorXd out;
        residual(u, lambda_sq, out);
        return out;
    }

    /// Laplacian part as triplets (ghost eliminations folded into the
    /// diagonal). Deterministic entry order.
    SparseOperator laplacian() const {
        SparseOperator op;
        op.dimension = size();
        op.entries.reserve(static_cast<std::size_t>(op.dimension) * 5);
        for (int j = 0; j < cols_; ++j) {
            const int jp = j + 1 == cols_ ? 0 : j + 1;
            const int jm = j == 0 ? cols_ - 1 : j - 1;
            for (int i = 0; i < n_r_; ++i) {
                const auto row = index(i, j);
                // c_in[0] == 0 exactly (zero-radius flux face), so the
                // diagonal sum is uniform across rows.
                double diag = -(c_in_[i] + c_out_[i] + 2.0 * c_th_[i]);
                if (i > 0) {
                    op.entries.emplace_back(row, index(i - 1, j), c_in_[i]);
                }
                if (i < n_r_ - 1) {
                    op.entries.emplace_back(row, index(i + 1, j), c_out_[i]);
                } else {
                    // Ghost elimination: conducting u_g = -u, insulated u_g = u.
                    diag += conducting_[static_cast<std::size_t>(j)] ? -c_out_[i] : c_out_[i];
                }
                op.entries.emplace_back(row, index(i, jm), c_th_[i]);
                op.entries.emplace_back(row, index(i, jp), c_th_[i]);
                op.entries.emplace_back(row, row, diag);
            }
        }
        return op;
    }

    const std::vector<double>& radial_coords() const { return rho_; }
    const std::vector<double>& cell_widths() const { return width_; }

private:
    static std::vector<double> detail_uniform_faces(int n_r) {
        std::vector<double> faces(static_cast<std::size_t>(n_r) + 1);
        for (int i = 0; i <= n_r; ++i) faces[static_cast<std::size_t>(i)] =
            static_cast<double>(i) / n_r;
        return faces;
    }

    int n_r_;
    int cols_;
    double dtheta_;
    std::vector<bool> conducting_;
    std::vector<double> rho_;
    std::vector<double> width_;
    std::vector<double> c_in_;
    std::vector<double> c_out_;
    std::vector<double> c_th_;
};

/// Residual of the governing equation on the full grid.
inline Eigen::VectorXd residual(const SolutionField& field) {
    const SectorStencil st = SectorStencil::full(*field.grid);
    return st.residual(field.values, field.lambda_sq());
}

/// Exact Jacobian of `residual` at `field`: the ghost-eliminated Laplacian
/// plus the diagonal lambda^2 e^u.
inline SparseOperator jacobian(const SolutionField& field) {
    const SectorStencil st = SectorStencil::full(*field.grid);
    SparseOperator op = st.laplacian();
    const double lam_sq = field.lambda_sq();
    const Eigen::Index dim = op.dimension;
    op.entries.reserve(op.entries.size() + static_cast<std::size_t>(dim));
    for (Eigen::Index k = 0; k < dim; ++k) {
        op.entries.emplace_back(k, k, lam_sq * std::exp(field.values[k]));
    }
    return op;
}

}  // namespace fkdisk
