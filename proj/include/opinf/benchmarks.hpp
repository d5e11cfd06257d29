#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include "opinf/dynsys.hpp"
#include "opinf/errors.hpp"
#include "opinf/rng.hpp"

namespace opinf {

namespace detail {

// Cell-centered 1-D Laplacian with homogeneous Neumann ends, grid spacing h.
// Zero column sums, so the plain discrete sum is invariant under diffusion.
inline Eigen::MatrixXd neumann_laplacian(int cells, double h) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(cells, cells);
    const double w = 1.0 / (h * h);
    for (int i = 0; i < cells; ++i) {
        if (i > 0) {
            L(i, i - 1) += w;
            L(i, i) -= w;
        }
        if (i < cells - 1) {
            L(i, i + 1) += w;
            L(i, i) -= w;
        }
    }
    return L;
}

} // namespace detail

/// Heat conduction on a 1-D rod over [0,1] with Robin heat-exchange ends and
/// the two end temperatures as inputs: dx/dt = (lambda/(c rho)) Lap x on the
/// interior, flux kappa/lambda (u_j - x) at each end. Discretized with a
/// cell-centered finite-difference Laplacian in space and implicit Euler in
/// time, giving a linear discrete-time system (ell = 1, p = 2).
struct HeatParams {
    int grid_points = 64;
    double dt = 0.01;
    double conductivity = 26.4;   // lambda
    double heat_capacity = 7620.0; // c
    double density = 654.0;        // rho
    double exchange = 69.696;      // kappa
};

inline PolynomialSystem make_heat_benchmark(const HeatParams &params = {}) {
    if (params.grid_points < 3) throw PreconditionError("make_heat_benchmark: grid_points must be >= 3");
    if (params.dt <= 0.0) throw PreconditionError("make_heat_benchmark: dt must be positive");
    const int N = params.grid_points;
    const double h = 1.0 / N;
    const double alpha = params.conductivity / (params.heat_capacity * params.density);
    const double robin = params.exchange / (params.conductivity * h);

    Eigen::MatrixXd gen = detail::neumann_laplacian(N, h);
    gen(0, 0) -= robin;
    gen(N - 1, N - 1) -= robin;
    gen *= alpha;

    Eigen::MatrixXd influence = Eigen::MatrixXd::Zero(N, 2);
    influence(0, 0) = alpha * robin;
    influence(N - 1, 1) = alpha * robin;

    const Eigen::MatrixXd stepper = Eigen::MatrixXd::Identity(N, N) - params.dt * gen;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(stepper);
    // Implicit Euler on diffusion is unconditionally invertible for dt > 0.
    if (!lu.matrixLU().diagonal().array().isFinite().all() ||
        (lu.matrixLU().diagonal().array().abs() < 1e-14).any())
        throw std::runtime_error("make_heat_benchmark: implicit-Euler matrix not invertible");
    const Eigen::MatrixXd A1 = lu.solve(Eigen::MatrixXd::Identity(N, N));
    const Eigen::MatrixXd B = lu.solve(params.dt * influence);

    std::vector<SparseMatrix> ops;
    ops.emplace_back(A1.sparseView());
    return PolynomialSystem(std::move(ops), B);
}

/// Diffusive three-species Lotka-Volterra dynamics on [0, pi] with Neumann
/// boundaries, spatially discretized at grid_points equidistant (cell-center)
/// points per species and advanced with Crank-Nicolson on the diffusion term
/// and an explicit evaluation of the reaction terms. Autonomous quadratic
/// system with N = 3 * grid_points; state layout is species-major:
/// [x1 at all points; x2 at all points; x3 at all points].
struct LotkaVolterraParams {
    int grid_points = 100;
    double dt = 0.01;
    double a1 = 1.01, a2 = 0.93, a3 = 0.1;
    double a4 = 0.19, a5 = 0.2;
    double a6 = 1.0, a7 = 0.05, a8 = 0.2;
    double d1 = 0.01, d2 = 0.03, d3 = 0.009;
};

struct LvEquilibrium {
    double x1, x2, x3;
};

/// Spatially homogeneous equilibrium of the Lotka-Volterra reactions:
/// x3* = a4/a5, x2* = (a1 a5 - a3 a4)/(a2 a5), x1* = (a8 - a7 x2*)/a6.
inline LvEquilibrium equilibrium_lv(const LotkaVolterraParams &params = {}) {
    if (params.a5 == 0.0 || params.a2 == 0.0 || params.a6 == 0.0)
        throw PreconditionError("equilibrium_lv: a2, a5, a6 must be nonzero");
    LvEquilibrium eq{};
    eq.x3 = params.a4 / params.a5;
    eq.x2 = (params.a1 * params.a5 - params.a3 * params.a4) / (params.a2 * params.a5);
    eq.x1 = (params.a8 - params.a7 * eq.x2) / params.a6;
    return eq;
}

inline PolynomialSystem make_lotka_volterra_benchmark(const LotkaVolterraParams &params = {}) {
    if (params.grid_points < 3) throw PreconditionError("make_lotka_volterra_benchmark: grid_points must be >= 3");
    if (params.dt <= 0.0) throw PreconditionError("make_lotka_volterra_benchmark: dt must be positive");
    const int G = params.grid_points;
    const int N = 3 * G;
    const double h = M_PI / G;
    const Eigen::MatrixXd L = detail::neumann_laplacian(G, h);
    const double diffusion[3] = {params.d1, params.d2, params.d3};
    const double linear_rate[3] = {params.a1, params.a4, -params.a8};

    // Per species: (I - dt/2 d L) x_{k+1} = (I + dt/2 d L) x_k + dt f(x_k).
    std::vector<Eigen::MatrixXd> Minv(3), prop(3);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(G, G);
    for (int s = 0; s < 3; ++s) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - 0.5 * params.dt * diffusion[s] * L);
        Minv[s] = lu.solve(I);
        prop[s] = lu.solve(I + 0.5 * params.dt * diffusion[s] * L);
    }

    Eigen::MatrixXd A1 = Eigen::MatrixXd::Zero(N, N);
    for (int s = 0; s < 3; ++s)
        A1.block(s * G, s * G, G, G) = prop[s] + params.dt * linear_rate[s] * Minv[s];

    // Quadratic reactions are pointwise products of species at the same grid
    // point; each carries its full coefficient on the unique monomial.
    const MonomialIndex quad_index(N, 2);
    std::vector<Eigen::Triplet<double>> q;
    auto add_reaction = [&](int target_species, int species_a, int species_b, double coeff, int g) {
        const int col = quad_index.position({species_a * G + g, species_b * G + g});
        const Eigen::VectorXd weights = params.dt * coeff * Minv[target_species].col(g);
        for (int r = 0; r < G; ++r)
            if (weights[r] != 0.0) q.emplace_back(target_species * G + r, col, weights[r]);
    };
    for (int g = 0; g < G; ++g) {
        add_reaction(0, 0, 1, -params.a2, g); // -a2 x1 x2
        add_reaction(0, 0, 2, -params.a3, g); // -a3 x1 x3
        add_reaction(1, 1, 2, -params.a5, g); // -a5 x2 x3
        add_reaction(2, 0, 2, params.a6, g);  // +a6 x1 x3
        add_reaction(2, 1, 2, params.a7, g);  // +a7 x2 x3
    }
    SparseMatrix A2(N, quad_index.size());
    A2.setFromTriplets(q.begin(), q.end());

    std::vector<SparseMatrix> ops;
    ops.emplace_back(SparseMatrix(A1.sparseView()));
    ops.push_back(std::move(A2));
    return PolynomialSystem(std::move(ops));
}

// ------------------------------------------------------------------
// Experiment protocol: excitation signals and initial conditions used to
// generate basis snapshots, dictionaries, and test trajectories.
// ------------------------------------------------------------------

/// Cell-center coordinates of the Lotka-Volterra grid on [0, pi].
inline Eigen::VectorXd lv_grid(int grid_points) {
    Eigen::VectorXd eta(grid_points);
    const double h = M_PI / grid_points;
    for (int i = 0; i < grid_points; ++i) eta[i] = (i + 0.5) * h;
    return eta;
}

/// Test initial state: equilibrium plus the fixed sinusoidal perturbations
/// sin(6 eta)/10, cos(4 eta)/10, sin(2 eta)/10 per species.
inline Eigen::VectorXd lv_test_initial_state(const LotkaVolterraParams &params = {}) {
    const LvEquilibrium eq = equilibrium_lv(params);
    const Eigen::VectorXd eta = lv_grid(params.grid_points);
    const int G = params.grid_points;
    Eigen::VectorXd x0(3 * G);
    for (int i = 0; i < G; ++i) {
        x0[i] = eq.x1 + std::sin(6.0 * eta[i]) / 10.0;
        x0[G + i] = eq.x2 + std::cos(4.0 * eta[i]) / 10.0;
        x0[2 * G + i] = eq.x3 + std::sin(2.0 * eta[i]) / 10.0;
    }
    return x0;
}

/// Basis-generation initial state: equilibrium plus random-amplitude,
/// random-frequency perturbations, six gamma draws per condition.
inline Eigen::VectorXd lv_basis_initial_state(const LotkaVolterraParams &params, Rng &rng) {
    const LvEquilibrium eq = equilibrium_lv(params);
    const Eigen::VectorXd eta = lv_grid(params.grid_points);
    const int G = params.grid_points;
    double gamma[6];
    for (double &g : gamma) g = rng.uniform();
    Eigen::VectorXd x0(3 * G);
    for (int i = 0; i < G; ++i) {
        x0[i] = eq.x1 + gamma[0] * std::sin(6.0 * gamma[1] * eta[i]) / 10.0;
        x0[G + i] = eq.x2 + gamma[2] * std::cos(4.0 * gamma[3] * eta[i]) / 10.0;
        x0[2 * G + i] = eq.x3 + gamma[4] * std::sin(2.0 * gamma[5] * eta[i]) / 10.0;
    }
    return x0;
}

/// Test input for the heat benchmark at step k: component i (1-based) is
/// 500 (1 - tanh(k dt / i^2)).
inline Eigen::VectorXd heat_test_input(Eigen::Index k, double dt, int p = 2) {
    Eigen::VectorXd u(p);
    for (int i = 1; i <= p; ++i)
        u[i - 1] = 500.0 * (1.0 - std::tanh(static_cast<double>(k) * dt / (static_cast<double>(i) * i)));
    return u;
}

inline Eigen::MatrixXd heat_test_inputs(Eigen::Index K, double dt, int p = 2) {
    Eigen::MatrixXd U(p, K);
    for (Eigen::Index k = 0; k < K; ++k) U.col(k) = heat_test_input(k, dt, p);
    return U;
}

/// Basis-generation input: the test input plus 250 gamma_{i,k} with gamma
/// uniform on [0,1] for k > 0 and zero at k = 0.
inline Eigen::MatrixXd heat_basis_inputs(Eigen::Index K, double dt, Rng &rng, int p = 2) {
    Eigen::MatrixXd U(p, K);
    for (Eigen::Index k = 0; k < K; ++k) {
        U.col(k) = heat_test_input(k, dt, p);
        if (k > 0)
            for (int i = 0; i < p; ++i) U(i, k) += 250.0 * rng.uniform();
    }
    return U;
}

} // namespace opinf
