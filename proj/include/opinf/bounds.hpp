#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "opinf/errors.hpp"

namespace opinf {

namespace detail {

inline double binomial(int top, int bottom) {
    if (bottom < 0 || bottom > top) return 0.0;
    double r = 1.0;
    for (int t = 1; t <= bottom; ++t) r = r * static_cast<double>(top - bottom + t) / static_cast<double>(t);
    return r;
}

// (2 sqrt(n) + 2^{1/l} sqrt(l))^l, the Gaussian-norm moment factor with both
// matrix dimensions equal to n; the empty product (l = 0) is 1.
inline double square_gauss_factor(int n, int l) {
    if (l == 0) return 1.0;
    const double base = 2.0 * std::sqrt(static_cast<double>(n)) +
                        std::pow(2.0, 1.0 / static_cast<double>(l)) * std::sqrt(static_cast<double>(l));
    return std::pow(base, static_cast<double>(l));
}

} // namespace detail

/// Moment bound for the spectral norm of a rows x cols standard Gaussian
/// matrix: E||G||_2^l <= (sqrt(rows) + sqrt(cols) + 2^{1/l} sqrt(l))^l.
inline double gauss_norm_moment_bound(int rows, int cols, int l) {
    if (rows < 1 || cols < 1 || l < 1) throw PreconditionError("gauss_norm_moment_bound: arguments must be >= 1");
    const double base = std::sqrt(static_cast<double>(rows)) + std::sqrt(static_cast<double>(cols)) +
                        std::pow(2.0, 1.0 / static_cast<double>(l)) * std::sqrt(static_cast<double>(l));
    return std::pow(base, static_cast<double>(l));
}

/// Bias ceiling for linear models with inputs at step k:
/// sum_{l=2}^k C_l (sigma/s_min)^l. The constant C_l carries three pieces:
/// the initial-condition term, the input term routed through B, and the
/// input term coupled with the B-error, exactly as the displayed formula
/// composes them. btil_u_norms[i] must hold ||Btil u_i||_2 and u_norms[i]
/// ||u_i||_2 for i = 0..k-1.
inline double bias_bound_linear(int k, double sigma, double s_min, double Atil_norm,
                                std::span<const double> btil_u_norms, std::span<const double> u_norms,
                                double x0_norm, int n, int p) {
    if (k < 1) throw PreconditionError("bias_bound_linear: k must be >= 1");
    if (s_min <= 0.0) throw PreconditionError("bias_bound_linear: s_min must be positive");
    // Empty norm spans stand for identically vanishing inputs; then only the
    // initial-condition term survives and the expression reduces to the
    // autonomous form.
    const bool has_btu = !btil_u_norms.empty();
    const bool has_u = p > 0 && !u_norms.empty();
    if ((has_btu && static_cast<int>(btil_u_norms.size()) < k) || (has_u && static_cast<int>(u_norms.size()) < k))
        throw PreconditionError("bias_bound_linear: need norms for u_0..u_{k-1}");
    const double nsr = sigma / s_min;
    const double gauss_b = std::sqrt(static_cast<double>(n)) + std::sqrt(static_cast<double>(p)) + 2.0;

    double total = 0.0;
    for (int l = 2; l <= k; ++l) {
        double c = detail::square_gauss_factor(n, l) *
                   detail::binomial(k, l) * std::pow(Atil_norm, k - l) * x0_norm;
        if (has_btu) {
            for (int i = l; i <= k - 1; ++i)
                c += detail::square_gauss_factor(n, l) * detail::binomial(i, l) * std::pow(Atil_norm, i - l) *
                     btil_u_norms[static_cast<std::size_t>(k - 1 - i)];
        }
        // Input-coupled term: index runs i = l-1..k-1; at i = l-1 the
        // Gaussian power is zero and its moment factor is the empty product.
        // The factor 2^{1/(2m)} sqrt(2m) with m = i-l+1 comes from bounding
        // E[||G_A||^m ||G_B||] by Cauchy-Schwarz.
        if (has_u) {
            for (int i = l - 1; i <= k - 1; ++i) {
                const int m = i - l + 1;
                double gauss_a = 1.0;
                if (m > 0) {
                    const double base = 2.0 * std::sqrt(static_cast<double>(n)) +
                                        std::pow(2.0, 1.0 / (2.0 * m)) * std::sqrt(2.0 * m);
                    gauss_a = std::pow(base, static_cast<double>(m));
                }
                c += detail::binomial(i, l - 1) * std::pow(Atil_norm, m) *
                     u_norms[static_cast<std::size_t>(k - 1 - i)] * gauss_a * gauss_b;
            }
        }
        total += c * std::pow(nsr, l);
    }
    return total;
}

/// Autonomous specialization (p = 0, no inputs):
/// sum_{l=2}^k C(k,l) (sigma/s_min)^l (2 sqrt(n) + 2^{1/l} sqrt(l))^l
/// ||Atil||^{k-l} ||x0||.
inline double bias_bound_autonomous(int k, double sigma, double s_min, double Atil_norm, double x0_norm, int n) {
    if (k < 1) throw PreconditionError("bias_bound_autonomous: k must be >= 1");
    if (s_min <= 0.0) throw PreconditionError("bias_bound_autonomous: s_min must be positive");
    const double nsr = sigma / s_min;
    double total = 0.0;
    for (int l = 2; l <= k; ++l)
        total += detail::binomial(k, l) * std::pow(nsr, l) * detail::square_gauss_factor(n, l) *
                 std::pow(Atil_norm, k - l) * x0_norm;
    return total;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2) throw PreconditionError("loglog_slope: need >= 2 paired points");
    const std::size_t m = xs.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (xs[i] <= 0.0 || ys[i] <= 0.0) throw PreconditionError("loglog_slope: values must be positive");
        const double lx = std::log(xs[i]);
        const double ly = std::log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = static_cast<double>(m) * sxx - sx * sx;
    if (denom == 0.0) throw PreconditionError("loglog_slope: degenerate abscissae");
    return (static_cast<double>(m) * sxy - sx * sy) / denom;
}

inline double loglog_slope(const std::vector<double> &xs, const std::vector<double> &ys) {
    return loglog_slope(std::span<const double>(xs), std::span<const double>(ys));
}

} // namespace opinf
