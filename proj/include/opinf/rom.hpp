#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "opinf/dynsys.hpp"
#include "opinf/errors.hpp"
#include "opinf/kron.hpp"
#include "opinf/regression.hpp"

namespace opinf {

/// A reduced model is nothing more than a set of reduced operators; both the
/// learned and the intrusively projected operators drive the same recurrence.
using ReducedModel = InferredOperators;

/// Forward simulation of the reduced recurrence
/// x_{k+1} = sum_j A_j x_k^j + B u_k. Learned models can blow up; a
/// non-finite state stops the run and reports the first bad step rather than
/// clamping, so evaluation harnesses can drop unstable replicates.
inline Trajectory simulate_reduced(const ReducedModel &model, const Eigen::VectorXd &x0,
                                   const Eigen::MatrixXd &inputs, Eigen::Index K, double dt = 1.0) {
    if (x0.size() != model.n) throw PreconditionError("simulate_reduced: initial state dimension mismatch");
    if (model.p > 0 && inputs.cols() < K)
        throw PreconditionError("simulate_reduced: fewer input columns than requested steps");
    std::vector<MonomialIndex> indices;
    for (int j = 2; j <= model.ell; ++j) indices.emplace_back(model.n, j);

    Trajectory traj;
    traj.dt = dt;
    traj.states.resize(model.n, K + 1);
    traj.inputs = model.p > 0 ? Eigen::MatrixXd(inputs.leftCols(K)) : Eigen::MatrixXd(0, K);
    traj.states.col(0) = x0;
    Eigen::VectorXd x = x0;
    for (Eigen::Index k = 0; k < K; ++k) {
        Eigen::VectorXd next = model.A_hat[0] * x;
        for (int j = 2; j <= model.ell; ++j)
            next += model.A_hat[static_cast<std::size_t>(j - 1)] * compressed_power(x, indices[static_cast<std::size_t>(j - 2)]);
        if (model.p > 0) next += model.B_hat * inputs.col(k);
        if (!next.allFinite())
            throw InstabilityError("simulate_reduced: non-finite state at step " + std::to_string(k + 1), k + 1);
        x = next;
        traj.states.col(k + 1) = x;
    }
    return traj;
}

inline Trajectory simulate_reduced(const ReducedModel &model, const Eigen::VectorXd &x0, Eigen::Index K,
                                   double dt = 1.0) {
    return simulate_reduced(model, x0, Eigen::MatrixXd(0, K), K, dt);
}

/// Time-varying linear recurrence x_{k+1} = A^{(k+1)} x_k + B u_k with one
/// independently drawn operator per step. Stated for linear models only;
/// with mutually independent draws the predicted states are unbiased at
/// every step, not just the first.
inline Trajectory simulate_resampled(const std::vector<Eigen::MatrixXd> &A_samples, const Eigen::MatrixXd &B_hat,
                                     const Eigen::VectorXd &x0, const Eigen::MatrixXd &inputs, double dt = 1.0) {
    if (A_samples.empty()) throw PreconditionError("simulate_resampled: no operator samples");
    const Eigen::Index n = x0.size();
    const Eigen::Index K = static_cast<Eigen::Index>(A_samples.size());
    const Eigen::Index p = B_hat.cols();
    for (const auto &A : A_samples)
        if (A.rows() != n || A.cols() != n)
            throw PreconditionError("simulate_resampled: operator samples must be square n x n (linear models only)");
    if (p > 0 && inputs.cols() < K)
        throw PreconditionError("simulate_resampled: fewer input columns than operator samples");

    Trajectory traj;
    traj.dt = dt;
    traj.states.resize(n, K + 1);
    traj.inputs = p > 0 ? Eigen::MatrixXd(inputs.leftCols(K)) : Eigen::MatrixXd(0, K);
    traj.states.col(0) = x0;
    Eigen::VectorXd x = x0;
    for (Eigen::Index k = 0; k < K; ++k) {
        Eigen::VectorXd next = A_samples[static_cast<std::size_t>(k)] * x;
        if (p > 0) next += B_hat * inputs.col(k);
        if (!next.allFinite())
            throw InstabilityError("simulate_resampled: non-finite state at step " + std::to_string(k + 1), k + 1);
        x = next;
        traj.states.col(k + 1) = x;
    }
    return traj;
}

} // namespace opinf
