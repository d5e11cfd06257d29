#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "opinf/dynsys.hpp"
#include "opinf/errors.hpp"
#include "opinf/kron.hpp"

namespace opinf {

/// Regression data matrix with rows [x^T, (x^2)^T, ..., (x^ell)^T, u^T] per
/// training sample; the block layout is fixed in that order.
struct DataMatrix {
    Eigen::MatrixXd D;
    int n = 0;
    int p = 0;
    int ell = 1;

    Eigen::Index samples() const { return D.rows(); }
    Eigen::Index width() const { return D.cols(); }
};

/// Column count of the data matrix: p + sum_j unique_monomial_count(n, j).
inline Eigen::Index data_matrix_width(int n, int p, int ell) {
    std::uint64_t m = static_cast<std::uint64_t>(p);
    for (int j = 1; j <= ell; ++j) m += unique_monomial_count(n, j);
    return static_cast<Eigen::Index>(m);
}

inline DataMatrix assemble_data_matrix(const Eigen::MatrixXd &Xproj, const Eigen::MatrixXd &U, int ell) {
    if (ell < 1) throw PreconditionError("assemble_data_matrix: ell must be >= 1");
    const Eigen::Index K = Xproj.cols();
    const int n = static_cast<int>(Xproj.rows());
    const int p = static_cast<int>(U.rows());
    if (p > 0 && U.cols() != K) throw PreconditionError("assemble_data_matrix: input column count mismatch");

    DataMatrix data;
    data.n = n;
    data.p = p;
    data.ell = ell;
    data.D.resize(K, data_matrix_width(n, p, ell));
    Eigen::Index offset = 0;
    data.D.leftCols(n) = Xproj.transpose();
    offset += n;
    for (int j = 2; j <= ell; ++j) {
        const MonomialIndex index(n, j);
        for (Eigen::Index k = 0; k < K; ++k)
            data.D.row(k).segment(offset, index.size()) = compressed_power(Xproj.col(k), index).transpose();
        offset += index.size();
    }
    if (p > 0) data.D.rightCols(p) = U.transpose();
    return data;
}

inline DataMatrix assemble_data_matrix(const Eigen::MatrixXd &Xproj, int ell) {
    return assemble_data_matrix(Xproj, Eigen::MatrixXd(0, Xproj.cols()), ell);
}

/// Inferred (or intrusively projected) reduced operators. s_min_of_D is the
/// smallest singular value of the data matrix recorded at solve time; NaN
/// for operators that did not come from a regression.
struct InferredOperators {
    std::vector<Eigen::MatrixXd> A_hat; // A_hat[j-1] is n x unique_monomial_count(n, j)
    Eigen::MatrixXd B_hat;              // n x p, zero-sized when p = 0
    double s_min_of_D = std::numeric_limits<double>::quiet_NaN();
    int n = 0;
    int p = 0;
    int ell = 1;

    /// Stacked M x n form [A_1, ..., A_ell, B]^T.
    Eigen::MatrixXd stacked() const {
        Eigen::MatrixXd O(data_matrix_width(n, p, ell), n);
        Eigen::Index offset = 0;
        for (const auto &A : A_hat) {
            O.middleRows(offset, A.cols()) = A.transpose();
            offset += A.cols();
        }
        if (p > 0) O.bottomRows(p) = B_hat.transpose();
        return O;
    }
};

namespace detail {

inline InferredOperators split_stacked(const Eigen::MatrixXd &O, int n, int p, int ell, double s_min) {
    InferredOperators ops;
    ops.n = n;
    ops.p = p;
    ops.ell = ell;
    ops.s_min_of_D = s_min;
    Eigen::Index offset = 0;
    for (int j = 1; j <= ell; ++j) {
        const Eigen::Index nj = static_cast<Eigen::Index>(unique_monomial_count(n, j));
        ops.A_hat.push_back(O.middleRows(offset, nj).transpose());
        offset += nj;
    }
    ops.B_hat = p > 0 ? Eigen::MatrixXd(O.bottomRows(p).transpose()) : Eigen::MatrixXd(n, 0);
    return ops;
}

} // namespace detail

/// Reusable least-squares solver for one data matrix: the orthogonal
/// factorization and the singular values are computed once, then many
/// right-hand sides can be solved against it (the Monte Carlo harness
/// re-solves per replicate with fresh noisy targets).
class OperatorLeastSquares {
  public:
    explicit OperatorLeastSquares(const DataMatrix &data, double rank_tol = 1e-10)
        : n_(data.n), p_(data.p), ell_(data.ell) {
        const Eigen::Index K = data.samples();
        const Eigen::Index M = data.width();
        if (K < M)
            throw RankError("infer_operators: under-determined problem, K = " + std::to_string(K) +
                            " rows < M = " + std::to_string(M) + " columns");
        Eigen::BDCSVD<Eigen::MatrixXd> svd(data.D);
        s_min_ = svd.singularValues()(M - 1);
        const double s_max = svd.singularValues()(0);
        if (s_min_ < rank_tol * s_max)
            throw RankError("infer_operators: data matrix numerically rank deficient, s_min = " +
                            std::to_string(s_min_) + " < " + std::to_string(rank_tol) + " * s_max = " +
                            std::to_string(rank_tol * s_max));
        qr_.compute(data.D);
    }

    double s_min() const { return s_min_; }

    /// Minimizer of ||D O - Ztilde^T||_F over O, split back into operators.
    InferredOperators solve(const Eigen::MatrixXd &Ztilde) const {
        if (Ztilde.rows() != n_ || Ztilde.cols() != qr_.rows())
            throw PreconditionError("infer_operators: target trajectory has wrong shape");
        const Eigen::MatrixXd O = qr_.solve(Ztilde.transpose());
        return detail::split_stacked(O, n_, p_, ell_, s_min_);
    }

  private:
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    double s_min_ = 0.0;
    int n_, p_, ell_;
};

/// One-shot operator inference: unique least-squares minimizer via a
/// rank-revealing orthogonal factorization (never the normal equations).
inline InferredOperators infer_operators(const DataMatrix &data, const Eigen::MatrixXd &Ztilde,
                                         double rank_tol = 1e-10) {
    return OperatorLeastSquares(data, rank_tol).solve(Ztilde);
}

/// Reduced operators by direct Galerkin projection of the truth system:
/// A_j -> V^T A_j applied to the symmetrized basis powers, B -> V^T B.
inline InferredOperators intrusive_operators(const PolynomialSystem &sys, const Eigen::MatrixXd &V) {
    InferredOperators ops;
    ops.n = static_cast<int>(V.cols());
    ops.p = static_cast<int>(sys.input_dim());
    ops.ell = sys.order();
    for (int j = 1; j <= sys.order(); ++j) ops.A_hat.push_back(project_polynomial_operator(sys.op(j), V, j));
    ops.B_hat = ops.p > 0 ? Eigen::MatrixXd(V.transpose() * sys.input_map()) : Eigen::MatrixXd(ops.n, 0);
    return ops;
}

/// Closed-form ceiling on E||Ohat - Otilde||_F^2: n M (sigma / s_min)^2.
inline double operator_mse_bound(int n, int M, double sigma, double s_min) {
    if (s_min <= 0.0) throw PreconditionError("operator_mse_bound: s_min must be positive");
    const double ratio = sigma / s_min;
    return static_cast<double>(n) * static_cast<double>(M) * ratio * ratio;
}

} // namespace opinf
