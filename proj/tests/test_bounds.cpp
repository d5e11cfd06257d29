#include <catch2/catch.hpp>

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "opinf/bounds.hpp"
#include "opinf/rng.hpp"

using namespace opinf;

TEST_CASE("gauss_norm_moment_bound fixed values") {
    CHECK(gauss_norm_moment_bound(1, 1, 1) == Approx(4.0));
    // l = 2 collapses 2^{1/2} sqrt(2) to 2, matching the (sqrt n + sqrt p + 2) factor
    CHECK(gauss_norm_moment_bound(3, 2, 2) ==
          Approx(std::pow(std::sqrt(3.0) + std::sqrt(2.0) + 2.0, 2)).epsilon(1e-13));
    CHECK_THROWS_AS(gauss_norm_moment_bound(0, 1, 1), PreconditionError);
}

TEST_CASE("empirical Gaussian norm moments stay below the bound") {
    Rng rng(2718);
    const long R = 20000;
    for (const auto &[rows, cols, l] : std::vector<std::tuple<int, int, int>>{{3, 2, 2}, {2, 2, 1}, {1, 3, 4}}) {
        double total = 0.0;
        for (long r = 0; r < R; ++r) {
            Eigen::MatrixXd G(rows, cols);
            for (Eigen::Index i = 0; i < G.size(); ++i) G(i) = rng.normal();
            const double norm = G.jacobiSvd().singularValues()(0);
            total += std::pow(norm, l);
        }
        REQUIRE(total / static_cast<double>(R) <= gauss_norm_moment_bound(rows, cols, l));
    }
}

TEST_CASE("bias_bound_autonomous fixed values") {
    // empty sum at k = 1
    CHECK(bias_bound_autonomous(1, 0.3, 1.0, 1.0, 1.0, 2) == 0.0);
    CHECK(bias_bound_autonomous(5, 0.0, 1.0, 1.0, 1.0, 2) == 0.0);
    // k = 2, n = 1: single l = 2 term with factor (2 + 2^{1/2} sqrt 2)^2 = 16
    CHECK(bias_bound_autonomous(2, 0.1, 1.0, 1.0, 1.0, 1) == Approx(0.16).epsilon(1e-12));
    // leading term is quadratic: doubling sigma quadruples the k = 2 bound
    const double once = bias_bound_autonomous(2, 0.05, 1.0, 0.9, 2.0, 3);
    const double twice = bias_bound_autonomous(2, 0.10, 1.0, 0.9, 2.0, 3);
    CHECK(twice == Approx(4.0 * once).epsilon(1e-12));
}

TEST_CASE("bias_bound_linear reduces exactly to the autonomous form without inputs") {
    for (int k = 1; k <= 10; ++k) {
        const double with_inputs_form = bias_bound_linear(k, 0.02, 0.5, 0.95, {}, {}, 1.7, 3, 0);
        const double autonomous_form = bias_bound_autonomous(k, 0.02, 0.5, 0.95, 1.7, 3);
        REQUIRE(with_inputs_form == Approx(autonomous_form).epsilon(1e-12));
    }
    // zero-filled input norms agree with empty ones
    const std::vector<double> zeros(10, 0.0);
    const double zero_filled = bias_bound_linear(10, 0.02, 0.5, 0.95, zeros, zeros, 1.7, 3, 2);
    const double empty = bias_bound_linear(10, 0.02, 0.5, 0.95, {}, {}, 1.7, 3, 2);
    CHECK(zero_filled == Approx(empty).epsilon(1e-12));
}

TEST_CASE("bias_bound_linear grows with k and vanishes where it should") {
    const std::vector<double> bu(10, 0.4), u(10, 1.0);
    CHECK(bias_bound_linear(1, 0.1, 1.0, 0.9, bu, u, 1.0, 2, 1) == 0.0);
    CHECK(bias_bound_linear(6, 0.0, 1.0, 0.9, bu, u, 1.0, 2, 1) == 0.0);
    double prev = 0.0;
    for (int k = 2; k <= 10; ++k) {
        const double bound = bias_bound_linear(k, 0.05, 1.0, 0.9, bu, u, 1.0, 2, 1);
        REQUIRE(bound > prev);
        prev = bound;
    }
    CHECK_THROWS_AS(bias_bound_linear(3, 0.1, 0.0, 1.0, bu, u, 1.0, 2, 1), PreconditionError);
    const std::vector<double> short_norms(1, 0.4);
    CHECK_THROWS_AS(bias_bound_linear(5, 0.1, 1.0, 1.0, short_norms, short_norms, 1.0, 2, 1), PreconditionError);
}

TEST_CASE("loglog_slope recovers power laws") {
    std::vector<double> xs{0.5, 1.0, 2.0, 4.0, 8.0};
    std::vector<double> quadratic, flat;
    for (double x : xs) {
        quadratic.push_back(x * x);
        flat.push_back(3.7);
    }
    CHECK(loglog_slope(xs, quadratic) == Approx(2.0).margin(1e-12));
    CHECK(loglog_slope(xs, flat) == Approx(0.0).margin(1e-12));

    Rng rng(99);
    std::vector<double> noisy;
    for (double x : xs) noisy.push_back(0.8 * std::pow(x, 2.5) * (1.0 + 0.01 * (2.0 * rng.uniform() - 1.0)));
    CHECK(loglog_slope(xs, noisy) == Approx(2.5).margin(0.1));

    std::vector<double> bad{1.0, -1.0};
    std::vector<double> ys{1.0, 1.0};
    CHECK_THROWS_AS(loglog_slope(bad, ys), PreconditionError);
    std::vector<double> single{1.0};
    CHECK_THROWS_AS(loglog_slope(single, single), PreconditionError);
}
