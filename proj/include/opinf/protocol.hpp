#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "opinf/benchmarks.hpp"
#include "opinf/dynsys.hpp"
#include "opinf/pod.hpp"
#include "opinf/selection.hpp"

namespace opinf {

/// Everything a selection/inference/evaluation run needs from one benchmark:
/// the truth system, the reduced basis built from its excitation snapshots,
/// and the dictionary of candidate regression rows.
struct BenchmarkWorkspace {
    PolynomialSystem sys;
    PodBasis basis;
    Dictionary dictionary;
    Eigen::MatrixXd basis_states; // snapshot matrix behind the basis
    Eigen::MatrixXd basis_inputs; // excitation inputs (empty when autonomous)
};

/// Heat workspace: one long trajectory from the uniform 500-degree state
/// under the decaying test input plus uniform excitation noise; the
/// dictionary holds one row per visited (projected state, input) pair.
inline BenchmarkWorkspace make_heat_workspace(const HeatParams &params, int n, long horizon, std::uint64_t seed) {
    PolynomialSystem sys = make_heat_benchmark(params);
    const int p = static_cast<int>(sys.input_dim());

    Rng input_rng(Rng::derive(seed, 100));
    const Eigen::MatrixXd inputs = heat_basis_inputs(horizon, params.dt, input_rng, p);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(sys.state_dim(), 500.0);
    const Trajectory traj = simulate(sys, x0, inputs, horizon, nullptr, params.dt);

    PodBasis basis = compute_pod(traj.states, n);
    const Eigen::MatrixXd Xproj = basis.V.transpose() * traj.states.leftCols(horizon);
    std::vector<RowProvenance> provenance;
    provenance.reserve(static_cast<std::size_t>(horizon));
    for (long k = 0; k < horizon; ++k) provenance.push_back({0, k});
    Dictionary dict = build_dictionary(Xproj, inputs, 1, std::move(provenance));
    return BenchmarkWorkspace{std::move(sys), std::move(basis), std::move(dict), traj.states, inputs};
}

/// Lotka-Volterra workspace: several trajectories from randomized
/// equilibrium perturbations; snapshots of all of them feed the basis, and
/// every visited state (except trajectory tails) becomes a dictionary row.
inline BenchmarkWorkspace make_lv_workspace(const LotkaVolterraParams &params, int n, long steps_per_trajectory,
                                            int trajectories, std::uint64_t seed) {
    PolynomialSystem sys = make_lotka_volterra_benchmark(params);
    const Eigen::Index N = sys.state_dim();

    Rng ic_rng(Rng::derive(seed, 200));
    Eigen::MatrixXd snapshots(N, trajectories * (steps_per_trajectory + 1));
    Eigen::MatrixXd dictionary_states(N, trajectories * steps_per_trajectory);
    std::vector<RowProvenance> provenance;
    provenance.reserve(static_cast<std::size_t>(trajectories * steps_per_trajectory));
    for (int i = 0; i < trajectories; ++i) {
        const Eigen::VectorXd x0 = lv_basis_initial_state(params, ic_rng);
        const Trajectory traj = simulate(sys, x0, steps_per_trajectory, nullptr, params.dt);
        snapshots.middleCols(i * (steps_per_trajectory + 1), steps_per_trajectory + 1) = traj.states;
        dictionary_states.middleCols(i * steps_per_trajectory, steps_per_trajectory) =
            traj.states.leftCols(steps_per_trajectory);
        for (long k = 0; k < steps_per_trajectory; ++k) provenance.push_back({i, k});
    }

    PodBasis basis = compute_pod(snapshots, n);
    const Eigen::MatrixXd Xproj = basis.V.transpose() * dictionary_states;
    Dictionary dict = build_dictionary(Xproj, 2, std::move(provenance));
    return BenchmarkWorkspace{std::move(sys), std::move(basis), std::move(dict), std::move(snapshots),
                              Eigen::MatrixXd()};
}

} // namespace opinf
