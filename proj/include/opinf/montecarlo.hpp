#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include "opinf/dynsys.hpp"
#include "opinf/errors.hpp"
#include "opinf/pod.hpp"
#include "opinf/regression.hpp"
#include "opinf/reproject.hpp"
#include "opinf/rom.hpp"

namespace opinf {

/// Per-time-step Monte Carlo estimates of the bias and MSE of learned-model
/// predictions against the intrusive reduced trajectory. Entry k-1 of each
/// vector belongs to time step k (step 0 carries no error by construction).
/// Unstable replicates are dropped from the estimates and counted, so
/// survivorship is always visible.
struct EvalReport {
    std::vector<double> bias;
    std::vector<double> bias_se;
    std::vector<double> mse;
    std::vector<double> mse_se;
    double sigma = 0.0;
    double s_min = 0.0;
    double noise_to_signal = 0.0;
    long replicates_used = 0;
    long replicates_unstable = 0;

    int steps() const { return static_cast<int>(bias.size()); }
};

/// Monte Carlo estimation loop: per replicate, fresh noisy re-projection on
/// the given training points, fresh inference, reduced simulation from the
/// projected test initial state, aggregation against the intrusive
/// trajectory. Replicates use pre-split noise streams and are stored per
/// replicate before a sequential reduction, so the result is identical for
/// any thread count.
///
/// A replicate counts as unstable when its trajectory leaves the
/// representable range or diverges beyond divergence_factor times the
/// intrusive trajectory's scale; both kinds are excluded from the estimates
/// and counted, matching how runs with unbounded errors are dropped from the
/// reference plots.
inline EvalReport mc_state_errors(const PolynomialSystem &sys, const Eigen::MatrixXd &V,
                                  const Eigen::MatrixXd &Xtrain, const Eigen::MatrixXd &Utrain,
                                  const Eigen::VectorXd &test_x0, const Eigen::MatrixXd &test_inputs,
                                  Eigen::Index steps, double sigma, long replicates, std::uint64_t seed,
                                  int threads = 1, double divergence_factor = 1e6) {
    if (replicates < 2) throw PreconditionError("mc_state_errors: need at least 2 replicates");
    if (test_x0.size() != sys.state_dim()) throw PreconditionError("mc_state_errors: test state dimension mismatch");
    const Eigen::Index n = V.cols();

    const InferredOperators intrusive = intrusive_operators(sys, V);
    const DataMatrix D = assemble_data_matrix(Xtrain, Utrain, sys.order());
    const OperatorLeastSquares solver(D);
    const Eigen::VectorXd x0_reduced = V.transpose() * test_x0;
    const Trajectory reference = simulate_reduced(intrusive, x0_reduced, test_inputs, steps);
    const double divergence_cap =
        divergence_factor * std::max(1.0, reference.states.cwiseAbs().maxCoeff());

    // Replicate storage: one flattened (n x steps) column per replicate.
    Eigen::MatrixXd samples(n * steps, replicates);
    std::vector<char> unstable(static_cast<std::size_t>(replicates), 0);

    auto run_range = [&](long lo, long hi) {
        for (long r = lo; r < hi; ++r) {
            const NoiseModel noise{sigma, Rng::derive(seed, static_cast<std::uint64_t>(r))};
            const Eigen::MatrixXd Z = reproject_noisy(sys, V, Xtrain, Utrain, noise);
            try {
                const InferredOperators ops = solver.solve(Z);
                const Trajectory traj = simulate_reduced(ops, x0_reduced, test_inputs, steps);
                if (traj.states.cwiseAbs().maxCoeff() > divergence_cap) {
                    unstable[static_cast<std::size_t>(r)] = 1;
                    continue;
                }
                samples.col(r) = Eigen::Map<const Eigen::VectorXd>(traj.states.data() + n, n * steps);
            } catch (const InstabilityError &) {
                unstable[static_cast<std::size_t>(r)] = 1;
            }
        }
    };

    const int T = std::max(1, threads);
    if (T == 1) {
        run_range(0, replicates);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (replicates + T - 1) / T;
        for (int t = 0; t < T; ++t) {
            const long lo = t * chunk;
            const long hi = std::min<long>(replicates, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto &th : pool) th.join();
    }

    EvalReport report;
    report.sigma = sigma;
    report.s_min = solver.s_min();
    report.noise_to_signal = sigma / solver.s_min();
    for (long r = 0; r < replicates; ++r)
        if (unstable[static_cast<std::size_t>(r)]) ++report.replicates_unstable;
    report.replicates_used = replicates - report.replicates_unstable;
    report.bias.assign(static_cast<std::size_t>(steps), std::numeric_limits<double>::quiet_NaN());
    report.bias_se = report.bias;
    report.mse = report.bias;
    report.mse_se = report.bias;
    if (report.replicates_used == 0) return report;

    const double R = static_cast<double>(report.replicates_used);
    for (Eigen::Index k = 0; k < steps; ++k) {
        const Eigen::VectorXd ref = reference.states.col(k + 1);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
        double qsum = 0.0;
        for (long r = 0; r < replicates; ++r) {
            if (unstable[static_cast<std::size_t>(r)]) continue;
            const auto state = samples.col(r).segment(k * n, n);
            sum += state;
            qsum += (state - ref).squaredNorm();
        }
        const Eigen::VectorXd mean = sum / R;
        const double mse = qsum / R;
        // second pass: centered moments do not cancel when spreads are tiny
        Eigen::VectorXd var = Eigen::VectorXd::Zero(n);
        double qvar = 0.0;
        for (long r = 0; r < replicates; ++r) {
            if (unstable[static_cast<std::size_t>(r)]) continue;
            const auto state = samples.col(r).segment(k * n, n);
            var += (state - mean).cwiseAbs2();
            const double dq = (state - ref).squaredNorm() - mse;
            qvar += dq * dq;
        }
        if (R > 1) {
            var /= (R - 1);
            qvar /= (R - 1);
        } else {
            var.setZero();
            qvar = 0.0;
        }
        const Eigen::VectorXd diff = mean - ref;
        const double bias = diff.norm();
        report.bias[static_cast<std::size_t>(k)] = bias;
        // Delta-method standard error of ||mean - ref||; falls back to the
        // total-variance form when the bias estimate is exactly zero.
        if (bias > 0.0) {
            const Eigen::VectorXd u = diff / bias;
            report.bias_se[static_cast<std::size_t>(k)] = std::sqrt(u.cwiseProduct(u).dot(var) / R);
        } else {
            report.bias_se[static_cast<std::size_t>(k)] = std::sqrt(var.sum() / R);
        }
        report.mse[static_cast<std::size_t>(k)] = mse;
        report.mse_se[static_cast<std::size_t>(k)] = std::sqrt(qvar / R);
    }
    return report;
}

} // namespace opinf
