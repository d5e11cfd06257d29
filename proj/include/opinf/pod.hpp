#pragma once

#include <string>

#include <Eigen/Core>
#include <Eigen/SVD>

#include "opinf/errors.hpp"

namespace opinf {

/// Orthonormal reduced basis: leading left singular vectors of a snapshot
/// matrix, with the retained singular values. Immutable and shareable.
struct PodBasis {
    Eigen::MatrixXd V;
    Eigen::VectorXd singular_values;

    Eigen::Index full_dim() const { return V.rows(); }
    Eigen::Index reduced_dim() const { return V.cols(); }
};

/// Leading-n left singular vectors of the snapshot matrix (no mean
/// centering: states are projected raw). Column signs are fixed so the entry
/// of largest magnitude in each column is positive, which keeps every
/// downstream number reproducible across runs.
inline PodBasis compute_pod(const Eigen::MatrixXd &snapshots, Eigen::Index n, double rank_tol = 1e-12) {
    if (n < 1) throw PreconditionError("compute_pod: n must be >= 1");
    if (n > std::min(snapshots.rows(), snapshots.cols()))
        throw PreconditionError("compute_pod: n exceeds min(rows, cols) of the snapshot matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(snapshots, Eigen::ComputeThinU);
    const Eigen::VectorXd &s = svd.singularValues();
    Eigen::Index effective_rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s[i] > rank_tol * s[0]) ++effective_rank;
    if (n > effective_rank)
        throw RankError("compute_pod: requested n = " + std::to_string(n) +
                        " exceeds effective snapshot rank " + std::to_string(effective_rank));

    PodBasis basis;
    basis.V = svd.matrixU().leftCols(n);
    basis.singular_values = s.head(n);
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index where = 0;
        basis.V.col(c).cwiseAbs().maxCoeff(&where);
        if (basis.V(where, c) < 0.0) basis.V.col(c) = -basis.V.col(c);
    }
    return basis;
}

/// Project full states onto the reduced coordinates: V^T X.
inline Eigen::MatrixXd project(const Eigen::MatrixXd &V, const Eigen::MatrixXd &X) {
    if (V.rows() != X.rows()) throw PreconditionError("project: row counts do not match");
    return V.transpose() * X;
}

} // namespace opinf
