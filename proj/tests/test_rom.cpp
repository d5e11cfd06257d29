#include <catch2/catch.hpp>

#include <Eigen/Dense>

#include "opinf/benchmarks.hpp"
#include "opinf/pod.hpp"
#include "opinf/protocol.hpp"
#include "opinf/regression.hpp"
#include "opinf/reproject.hpp"
#include "opinf/rom.hpp"
#include "opinf/selection.hpp"

using namespace opinf;

TEST_CASE("zero operators collapse every trajectory to zero") {
    ReducedModel model;
    model.n = 2;
    model.p = 0;
    model.ell = 1;
    model.A_hat = {Eigen::MatrixXd::Zero(2, 2)};
    model.B_hat = Eigen::MatrixXd(2, 0);
    Eigen::VectorXd x0(2);
    x0 << 3.0, -4.0;
    const Trajectory traj = simulate_reduced(model, x0, 5);
    CHECK(traj.states.col(0) == x0);
    for (int k = 1; k <= 5; ++k) CHECK(traj.states.col(k).norm() == 0.0);
}

TEST_CASE("instability is reported with the first bad step") {
    ReducedModel model;
    model.n = 1;
    model.p = 0;
    model.ell = 2;
    Eigen::MatrixXd A1(1, 1), A2(1, 1);
    A1 << 0.0;
    A2 << 1e200;
    model.A_hat = {A1, A2};
    model.B_hat = Eigen::MatrixXd(1, 0);
    Eigen::VectorXd x0(1);
    x0 << 1e200;
    try {
        simulate_reduced(model, x0, 10);
        FAIL("expected InstabilityError");
    } catch (const InstabilityError &e) {
        CHECK(e.step() == 1);
    }
}

TEST_CASE("intrusive reduced model of the LV benchmark tracks the truth") {
    LotkaVolterraParams params;
    params.grid_points = 10; // N = 30
    PolynomialSystem sys = make_lotka_volterra_benchmark(params);
    const Eigen::VectorXd x0 = lv_test_initial_state(params);
    const Trajectory truth = simulate(sys, x0, 400);
    const PodBasis basis = compute_pod(truth.states, 6);
    const InferredOperators intrusive = intrusive_operators(sys, basis.V);

    const Trajectory reduced = simulate_reduced(intrusive, basis.V.transpose() * x0, 40);
    REQUIRE(reduced.states.allFinite());
    const Eigen::MatrixXd lifted = basis.V * reduced.states;
    const double truth_range = truth.states.leftCols(41).cwiseAbs().maxCoeff();
    CHECK(lifted.cwiseAbs().maxCoeff() <= 2.0 * truth_range);
}

TEST_CASE("noise-free learned model reproduces the intrusive trajectory") {
    LotkaVolterraParams params;
    params.grid_points = 8;
    const BenchmarkWorkspace ws = make_lv_workspace(params, 4, 400, 4, 29);
    const SelectionPlan plan = greedy_oversample(ws.dictionary, qdeim_init(ws.dictionary),
                                                 ws.dictionary.width() + 5);
    const Eigen::MatrixXd Xproj = ws.dictionary.states_of(plan.indices);
    const Eigen::MatrixXd Y = reproject_clean(ws.sys, ws.basis.V, Xproj, Eigen::MatrixXd());
    const InferredOperators learned = infer_operators(select_rows(ws.dictionary, plan), Y);
    const InferredOperators intrusive = intrusive_operators(ws.sys, ws.basis.V);

    const Eigen::VectorXd z0 = ws.basis.V.transpose() * lv_test_initial_state(params);
    const Trajectory a = simulate_reduced(learned, z0, 40);
    const Trajectory b = simulate_reduced(intrusive, z0, 40);
    CHECK((a.states - b.states).norm() <= 1e-7 * b.states.norm());
}

TEST_CASE("learned trajectories approach the intrusive one as sigma shrinks") {
    LotkaVolterraParams params;
    params.grid_points = 6;
    const BenchmarkWorkspace ws = make_lv_workspace(params, 3, 300, 4, 31);
    const SelectionPlan plan = greedy_oversample(ws.dictionary, qdeim_init(ws.dictionary),
                                                 ws.dictionary.width() + 5);
    const Eigen::MatrixXd Xproj = ws.dictionary.states_of(plan.indices);
    const DataMatrix data = select_rows(ws.dictionary, plan);
    const OperatorLeastSquares solver(data);
    const InferredOperators intrusive = intrusive_operators(ws.sys, ws.basis.V);
    const Eigen::VectorXd z0 = ws.basis.V.transpose() * lv_test_initial_state(params);
    const Trajectory reference = simulate_reduced(intrusive, z0, 20);

    std::vector<double> medians;
    for (double sigma : {1e-2, 1e-3, 1e-4}) {
        std::vector<double> errors;
        for (std::uint64_t r = 0; r < 11; ++r) {
            const Eigen::MatrixXd Z = reproject_noisy(ws.sys, ws.basis.V, Xproj, Eigen::MatrixXd(),
                                                      NoiseModel{sigma, Rng::derive(63, r)});
            const Trajectory traj = simulate_reduced(solver.solve(Z), z0, 20);
            errors.push_back((traj.states - reference.states).norm());
        }
        std::nth_element(errors.begin(), errors.begin() + 5, errors.end());
        medians.push_back(errors[5]);
    }
    CHECK(medians[1] < medians[0]);
    CHECK(medians[2] < medians[1]);
}

TEST_CASE("simulate_reduced is deterministic") {
    ReducedModel model;
    model.n = 2;
    model.p = 1;
    model.ell = 1;
    Eigen::MatrixXd A(2, 2);
    A << 0.9, 0.05, -0.02, 0.8;
    model.A_hat = {A};
    model.B_hat = Eigen::MatrixXd::Ones(2, 1);
    Eigen::VectorXd x0 = Eigen::VectorXd::Ones(2);
    const Eigen::MatrixXd U = Eigen::MatrixXd::Constant(1, 20, 0.3);
    const Trajectory a = simulate_reduced(model, x0, U, 20);
    const Trajectory b = simulate_reduced(model, x0, U, 20);
    CHECK(a.states == b.states);
}

TEST_CASE("resampled recurrence with identical deterministic draws reduces to simulate_reduced") {
    Eigen::MatrixXd A(2, 2);
    A << 0.7, 0.1, 0.0, 0.6;
    Eigen::MatrixXd B(2, 1);
    B << 1.0, -1.0;
    ReducedModel model;
    model.n = 2;
    model.p = 1;
    model.ell = 1;
    model.A_hat = {A};
    model.B_hat = B;
    Eigen::VectorXd x0(2);
    x0 << 0.5, 0.25;
    const Eigen::MatrixXd U = Eigen::MatrixXd::Constant(1, 6, 0.1);

    const std::vector<Eigen::MatrixXd> samples(6, A);
    const Trajectory fixed = simulate_resampled(samples, B, x0, U);
    const Trajectory plain = simulate_reduced(model, x0, U, 6);
    CHECK(fixed.states.isApprox(plain.states, 1e-14));

    // K = 1 is a single application
    const Trajectory one = simulate_resampled({A}, B, x0, U.leftCols(1));
    CHECK(one.states.col(1).isApprox(A * x0 + B * U.col(0), 1e-14));

    const std::vector<Eigen::MatrixXd> bad(2, Eigen::MatrixXd::Zero(2, 3));
    CHECK_THROWS_AS(simulate_resampled(bad, B, x0, U), PreconditionError);
}
