#pragma once

#include <atomic>
#include <cstdint>

#include <Eigen/Core>

#include "opinf/dynsys.hpp"
#include "opinf/errors.hpp"
#include "opinf/pod.hpp"

namespace opinf {

/// Counts queries made to the high-dimensional system, the cost unit the
/// data-selection strategy economizes.
struct QueryCounter {
    std::atomic<std::uint64_t> queries{0};
};

/// Re-projection: lift each reduced training point back to full space, query
/// the truth system once, and project the response. Column k depends only on
/// (x_k, u_k); columns never couple. Xproj may come from a projected
/// trajectory or from selected dictionary rows.
inline Eigen::MatrixXd reproject_clean(const PolynomialSystem &sys, const Eigen::MatrixXd &V,
                                       const Eigen::MatrixXd &Xproj, const Eigen::MatrixXd &U,
                                       QueryCounter *counter = nullptr) {
    if (V.rows() != sys.state_dim()) throw PreconditionError("reproject: basis rows != state dimension");
    if (Xproj.rows() != V.cols()) throw PreconditionError("reproject: projected states have wrong dimension");
    if (!sys.autonomous() && U.cols() != Xproj.cols())
        throw PreconditionError("reproject: input column count mismatch");
    const Eigen::Index K = Xproj.cols();
    Eigen::MatrixXd out(V.cols(), K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const Eigen::VectorXd u = sys.autonomous() ? Eigen::VectorXd() : Eigen::VectorXd(U.col(k));
        out.col(k) = V.transpose() * sys.step(V * Xproj.col(k), u);
        if (counter != nullptr) counter->queries.fetch_add(1, std::memory_order_relaxed);
    }
    return out;
}

/// Noisy variant: each query of the truth system picks up a fresh
/// N(0, sigma^2 I) draw before projection. The noise stream is pre-split per
/// column index, so the result is independent of evaluation order and
/// reduces bit-exactly to reproject_clean at sigma = 0.
inline Eigen::MatrixXd reproject_noisy(const PolynomialSystem &sys, const Eigen::MatrixXd &V,
                                       const Eigen::MatrixXd &Xproj, const Eigen::MatrixXd &U,
                                       const NoiseModel &noise, QueryCounter *counter = nullptr) {
    if (noise.sigma == 0.0) return reproject_clean(sys, V, Xproj, U, counter);
    if (V.rows() != sys.state_dim()) throw PreconditionError("reproject: basis rows != state dimension");
    if (Xproj.rows() != V.cols()) throw PreconditionError("reproject: projected states have wrong dimension");
    if (!sys.autonomous() && U.cols() != Xproj.cols())
        throw PreconditionError("reproject: input column count mismatch");
    const Eigen::Index K = Xproj.cols();
    Eigen::MatrixXd out(V.cols(), K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const Eigen::VectorXd u = sys.autonomous() ? Eigen::VectorXd() : Eigen::VectorXd(U.col(k));
        Rng column_stream(Rng::derive(noise.seed, static_cast<std::uint64_t>(k)));
        const Eigen::VectorXd xi = column_stream.normal_vector(sys.state_dim(), noise.sigma);
        out.col(k) = V.transpose() * (sys.step(V * Xproj.col(k), u) + xi);
        if (counter != nullptr) counter->queries.fetch_add(1, std::memory_order_relaxed);
    }
    return out;
}

} // namespace opinf
