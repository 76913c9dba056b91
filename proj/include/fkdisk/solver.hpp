#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <cmath>
#include <vector>

#include "fkdisk/operators.hpp"

namespace fkdisk {

/// Direct sparse solver for the Newton systems of one stencil.
///
/// Works on the volume-weighted symmetrized system: with W = diag(rho_i w_i),
/// -W (L + lambda^2 diag(e^u)) is symmetric, and positive definite along the
/// whole subcritical branch (its first zero eigenvalue is the fold). A sparse
/// Cholesky factorization is therefore applicable, fast, and doubles as a
/// fold detector: factorization breakdown means lambda at or beyond the
/// critical value. The sparsity pattern is fixed per grid, so the symbolic
/// analysis runs once and each Newton iteration only refreshes the diagonal.
class StencilSolver {
public:
    explicit StencilSolver(const SectorStencil& stencil) {
        const Eigen::Index dim = stencil.size();
        weight_.resize(dim);
        for (int j = 0; j < stencil.cols(); ++j) {
            for (int i = 0; i < stencil.radial_count(); ++i) {
                weight_[stencil.index(i, j)] =
                    stencil.radial_coords()[static_cast<std::size_t>(i)] *
                    stencil.cell_widths()[static_cast<std::size_t>(i)];
            }
        }
        SparseOperator lap = stencil.laplacian();
        for (auto& entry : lap.entries) {
            entry = Eigen::Triplet<double>(entry.row(), entry.col(),
                                           -weight_[entry.row()] * entry.value());
        }
        base_ = lap.matrix();
        base_.makeCompressed();
        mat_ = base_;
        diag_slot_.resize(static_cast<std::size_t>(dim));
        for (int k = 0; k < base_.outerSize(); ++k) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(base_, k); it; ++it) {
                if (it.row() == it.col()) {
                    diag_slot_[static_cast<std::size_t>(it.row())] =
                        static_cast<std::size_t>(&it.valueRef() - base_.valuePtr());
                }
            }
        }
        llt_.analyzePattern(mat_);
    }

    Eigen::Index size() const { return base_.rows(); }

    /// Factorize -W (L + lambda_sq diag(e^u)). Returns false on breakdown
    /// (lambda at or beyond the fold, or an indefinite transient iterate).
    bool factorize(const Eigen::VectorXd& u, double lambda_sq) {
        const auto nnz = static_cast<std::size_t>(base_.nonZeros());
        std::copy(base_.valuePtr(), base_.valuePtr() + nnz, mat_.valuePtr());
        double* vals = mat_.valuePtr();
        for (Eigen::Index r = 0; r < base_.rows(); ++r) {
            vals[diag_slot_[static_cast<std::size_t>(r)]] -=
                weight_[r] * lambda_sq * std::exp(u[r]);
        }
        llt_.factorize(mat_);
        return llt_.info() == Eigen::Success;
    }

    /// Newton step for residual f: solves J du = -f through the weighted
    /// system (-W J) du = W f.
    Eigen::VectorXd step(const Eigen::VectorXd& f) const {
        return llt_.solve(weight_.cwiseProduct(f));
    }

private:
    Eigen::VectorXd weight_;
    Eigen::SparseMatrix<double> base_;  // -W L, compressed
    Eigen::SparseMatrix<double> mat_;   // -W (L + nonlinear diagonal)
    std::vector<std::size_t> diag_slot_;
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower,
                         Eigen::AMDOrdering<int>>
        llt_;
};

}  // namespace fkdisk
