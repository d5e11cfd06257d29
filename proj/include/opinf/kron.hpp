#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "opinf/errors.hpp"

namespace opinf {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Number of degree-j monomials in dim variables that are unique up to
/// permutation: C(dim + j - 1, j). Throws std::overflow_error if the binomial
/// does not fit in 64 bits.
inline std::uint64_t unique_monomial_count(int dim, int j) {
    if (dim < 1 || j < 1) throw PreconditionError("unique_monomial_count: dim and j must be >= 1");
    // C(dim+j-1, j) = prod_{t=1..j} (dim-1+t)/t, integral at every step when
    // divided in this order.
    std::uint64_t result = 1;
    for (int t = 1; t <= j; ++t) {
        const std::uint64_t factor = static_cast<std::uint64_t>(dim - 1) + static_cast<std::uint64_t>(t);
        if (result > std::numeric_limits<std::uint64_t>::max() / factor)
            throw std::overflow_error("unique_monomial_count: binomial overflows 64 bits");
        result = result * factor / static_cast<std::uint64_t>(t);
    }
    return result;
}

/// Enumeration of the unique degree-j monomials in dim variables, as
/// lexicographically ordered non-decreasing multi-indices, together with the
/// reverse lookup from a sorted multi-index to its table position. This is
/// the index realization of the compression/expansion pair: compression keeps
/// the sorted-representative Kronecker slot of each monomial, expansion
/// scatters one source slot to every permuted Kronecker position.
///
/// Immutable after construction and safe to share across threads.
class MonomialIndex {
  public:
    MonomialIndex(int dim, int order) : dim_(dim), order_(order) {
        const std::uint64_t count = unique_monomial_count(dim, order);
        table_.reserve(count);
        std::vector<int> multi(order, 0);
        while (true) {
            table_.push_back(multi);
            // next non-decreasing multi-index in lexicographic order
            int t = order - 1;
            while (t >= 0 && multi[t] == dim - 1) --t;
            if (t < 0) break;
            const int v = multi[t] + 1;
            for (int s = t; s < order; ++s) multi[s] = v;
        }
        for (std::size_t m = 0; m < table_.size(); ++m) position_.emplace(table_[m], static_cast<int>(m));
    }

    int dim() const { return dim_; }
    int order() const { return order_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(table_.size()); }

    const std::vector<int> &multi_index(Eigen::Index m) const { return table_[static_cast<std::size_t>(m)]; }

    /// Table position of a multi-index; the argument is sorted internally.
    int position(std::vector<int> multi) const {
        std::sort(multi.begin(), multi.end());
        const auto it = position_.find(multi);
        if (it == position_.end()) throw PreconditionError("MonomialIndex::position: multi-index out of range");
        return it->second;
    }

  private:
    int dim_;
    int order_;
    std::vector<std::vector<int>> table_;
    std::map<std::vector<int>, int> position_;
};

/// Compressed j-th power of x: one entry per unique monomial, in the index
/// table's order. Entry m is the product x[i_1]...x[i_j] over the m-th
/// multi-index.
inline Eigen::VectorXd compressed_power(const Eigen::VectorXd &x, const MonomialIndex &index) {
    if (x.size() != index.dim()) throw PreconditionError("compressed_power: vector length does not match index dim");
    if (index.order() == 1) return x;
    Eigen::VectorXd out(index.size());
    for (Eigen::Index m = 0; m < index.size(); ++m) {
        double prod = 1.0;
        for (int i : index.multi_index(m)) prod *= x[i];
        out[m] = prod;
    }
    return out;
}

inline Eigen::VectorXd compressed_power(const Eigen::VectorXd &x, int j) {
    return compressed_power(x, MonomialIndex(static_cast<int>(x.size()), j));
}

/// Expand a compressed power back to the full j-fold Kronecker power: the
/// entry at Kronecker position (k_1,...,k_j) is taken from the compressed
/// slot of sorted(k_1,...,k_j). Composing with compressed_power recovers
/// x (x) ... (x) x exactly.
inline Eigen::VectorXd expand_to_kron(const Eigen::VectorXd &z_pow, const MonomialIndex &index) {
    if (z_pow.size() != index.size()) throw PreconditionError("expand_to_kron: compressed length mismatch");
    const int dim = index.dim();
    const int j = index.order();
    std::uint64_t full = 1;
    for (int t = 0; t < j; ++t) {
        if (full > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(dim))
            throw std::overflow_error("expand_to_kron: dim^j overflows");
        full *= static_cast<std::uint64_t>(dim);
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(full));
    std::vector<int> digits(j);
    for (std::uint64_t q = 0; q < full; ++q) {
        std::uint64_t rest = q;
        for (int t = j - 1; t >= 0; --t) {
            digits[static_cast<std::size_t>(t)] = static_cast<int>(rest % static_cast<std::uint64_t>(dim));
            rest /= static_cast<std::uint64_t>(dim);
        }
        out[static_cast<Eigen::Index>(q)] = z_pow[index.position(digits)];
    }
    return out;
}

namespace detail {

// Compression of sum_{distinct perms pi} v_{pi(1)} (x) ... (x) v_{pi(j)} for
// the columns of V named by `multi`, evaluated directly on the compressed
// slots: slot (r_1 <= ... <= r_j) accumulates prod_t V(r_t, pi(t)). The
// distinct-permutation iteration makes the multiset multiplicity exact.
inline Eigen::VectorXd compressed_symmetrized_product(const Eigen::MatrixXd &V, std::vector<int> multi,
                                                      const MonomialIndex &full_index) {
    const int j = full_index.order();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(full_index.size());
    std::sort(multi.begin(), multi.end());
    do {
        for (Eigen::Index q = 0; q < full_index.size(); ++q) {
            const std::vector<int> &rep = full_index.multi_index(q);
            double prod = 1.0;
            for (int t = 0; t < j; ++t) prod *= V(rep[static_cast<std::size_t>(t)], multi[static_cast<std::size_t>(t)]);
            w[q] += prod;
        }
    } while (std::next_permutation(multi.begin(), multi.end()));
    return w;
}

} // namespace detail

/// Galerkin projection of a degree-j polynomial operator: V^T A_j applied to
/// the compressed symmetrized Kronecker powers of the basis columns, built
/// column by column so nothing of size dim^j is ever materialized.
/// V must have orthonormal columns. The result satisfies, for every reduced
/// z, result * compressed_power(z, j) == V^T A_j compressed_power(V z, j).
inline Eigen::MatrixXd project_polynomial_operator(const SparseMatrix &A_j, const Eigen::MatrixXd &V, int j,
                                                   double orthonormality_tol = 1e-10) {
    const Eigen::Index N = V.rows();
    const Eigen::Index n = V.cols();
    if (A_j.rows() != N) throw PreconditionError("project_polynomial_operator: operator row count != basis rows");
    const MonomialIndex full_index(static_cast<int>(N), j);
    if (A_j.cols() != full_index.size())
        throw PreconditionError("project_polynomial_operator: operator column count != unique_monomial_count(N, j)");
    const double orth_err = (V.transpose() * V - Eigen::MatrixXd::Identity(n, n)).norm();
    if (orth_err > orthonormality_tol)
        throw PreconditionError("project_polynomial_operator: basis columns not orthonormal");

    const MonomialIndex reduced_index(static_cast<int>(n), j);
    Eigen::MatrixXd out(n, reduced_index.size());
    for (Eigen::Index m = 0; m < reduced_index.size(); ++m) {
        const Eigen::VectorXd w = detail::compressed_symmetrized_product(V, reduced_index.multi_index(m), full_index);
        out.col(m) = V.transpose() * (A_j * w);
    }
    return out;
}

inline Eigen::MatrixXd project_polynomial_operator(const Eigen::MatrixXd &A_j, const Eigen::MatrixXd &V, int j,
                                                   double orthonormality_tol = 1e-10) {
    return project_polynomial_operator(SparseMatrix(A_j.sparseView()), V, j, orthonormality_tol);
}

} // namespace opinf
