#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "opinf/errors.hpp"
#include "opinf/regression.hpp"

namespace opinf {

/// Smallest singular value of a matrix.
inline double s_min(const Eigen::MatrixXd &A) {
    if (A.size() == 0) throw PreconditionError("s_min: empty matrix");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A);
    return svd.singularValues()(svd.singularValues().size() - 1);
}

/// Where a dictionary row came from: which source trajectory, which step.
struct RowProvenance {
    int trajectory = 0;
    long time_index = 0;
};

/// Candidate rows for the data matrix, laid out exactly like DataMatrix rows
/// ([x^T, (x^2)^T, ..., u^T]), plus per-row provenance.
struct Dictionary {
    Eigen::MatrixXd rows; // L x M
    std::vector<RowProvenance> provenance;
    int n = 0;
    int p = 0;
    int ell = 1;

    Eigen::Index size() const { return rows.rows(); }
    Eigen::Index width() const { return rows.cols(); }

    /// The reduced states of the given rows, one per column (first n entries
    /// of each row).
    Eigen::MatrixXd states_of(const std::vector<int> &indices) const {
        Eigen::MatrixXd X(n, static_cast<Eigen::Index>(indices.size()));
        for (std::size_t i = 0; i < indices.size(); ++i)
            X.col(static_cast<Eigen::Index>(i)) = rows.row(indices[i]).head(n).transpose();
        return X;
    }

    /// The inputs of the given rows, one per column (last p entries).
    Eigen::MatrixXd inputs_of(const std::vector<int> &indices) const {
        Eigen::MatrixXd U(p, static_cast<Eigen::Index>(indices.size()));
        for (std::size_t i = 0; i < indices.size(); ++i)
            U.col(static_cast<Eigen::Index>(i)) = rows.row(indices[i]).tail(p).transpose();
        return U;
    }
};

inline Dictionary build_dictionary(const Eigen::MatrixXd &Xproj, const Eigen::MatrixXd &U, int ell,
                                   std::vector<RowProvenance> provenance = {}) {
    const DataMatrix data = assemble_data_matrix(Xproj, U, ell);
    Dictionary dict;
    dict.rows = data.D;
    dict.n = data.n;
    dict.p = data.p;
    dict.ell = data.ell;
    if (!provenance.empty() && static_cast<Eigen::Index>(provenance.size()) != dict.size())
        throw PreconditionError("build_dictionary: provenance length != row count");
    dict.provenance = std::move(provenance);
    if (dict.provenance.empty())
        for (Eigen::Index i = 0; i < dict.size(); ++i) dict.provenance.push_back({0, i});
    return dict;
}

inline Dictionary build_dictionary(const Eigen::MatrixXd &Xproj, int ell,
                                   std::vector<RowProvenance> provenance = {}) {
    return build_dictionary(Xproj, Eigen::MatrixXd(0, Xproj.cols()), ell, std::move(provenance));
}

/// An ordered choice of dictionary rows, with the record of s_min(P_m^T D)
/// for m = M..K as rows were appended.
struct SelectionPlan {
    std::vector<int> indices;
    std::vector<double> s_min_history;
};

/// Gather the selected rows into a regression-ready data matrix.
inline DataMatrix select_rows(const Dictionary &dict, const SelectionPlan &plan) {
    DataMatrix data;
    data.n = dict.n;
    data.p = dict.p;
    data.ell = dict.ell;
    data.D.resize(static_cast<Eigen::Index>(plan.indices.size()), dict.width());
    for (std::size_t i = 0; i < plan.indices.size(); ++i) {
        if (plan.indices[i] < 0 || plan.indices[i] >= dict.size())
            throw PreconditionError("select_rows: index out of range");
        data.D.row(static_cast<Eigen::Index>(i)) = dict.rows.row(plan.indices[i]);
    }
    return data;
}

/// QDEIM initialization: QR of D^T with column pivoting; the first M pivots
/// are the selected rows, in pivot order.
inline SelectionPlan qdeim_init(const Dictionary &dict, double rank_tol = 1e-10) {
    const Eigen::Index L = dict.size();
    const Eigen::Index M = dict.width();
    if (L < M) throw PreconditionError("qdeim_init: dictionary has fewer rows than columns");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dict.rows.transpose());
    const Eigen::MatrixXd &R = qr.matrixQR();
    if (std::abs(R(M - 1, M - 1)) < rank_tol * std::abs(R(0, 0)))
        throw RankError("qdeim_init: dictionary numerically rank deficient (|R_MM| = " +
                        std::to_string(std::abs(R(M - 1, M - 1))) + ")");
    SelectionPlan plan;
    const auto &perm = qr.colsPermutation().indices();
    plan.indices.reserve(M);
    for (Eigen::Index i = 0; i < M; ++i) plan.indices.push_back(perm[i]);
    plan.s_min_history.push_back(s_min(select_rows(dict, plan).D));
    return plan;
}

/// Greedy oversampling: while fewer than K rows are selected, take the thin
/// SVD of the current selection, rotate every unselected candidate row by the
/// right singular vectors, and append the row whose component along the
/// smallest singular direction is largest in magnitude. Ties, including the
/// all-zero-criterion case, resolve to the smallest row index. Appending a
/// row can never decrease the smallest singular value, so the recorded
/// history is non-decreasing.
inline SelectionPlan greedy_oversample(const Dictionary &dict, SelectionPlan plan, Eigen::Index K) {
    const Eigen::Index L = dict.size();
    const Eigen::Index M = dict.width();
    if (K > L) throw PreconditionError("greedy_oversample: K exceeds dictionary size");
    if (static_cast<Eigen::Index>(plan.indices.size()) < M)
        throw PreconditionError("greedy_oversample: plan must already hold at least M rows");
    std::vector<bool> taken(static_cast<std::size_t>(L), false);
    for (int idx : plan.indices) {
        if (idx < 0 || idx >= L) throw PreconditionError("greedy_oversample: plan index out of range");
        taken[static_cast<std::size_t>(idx)] = true;
    }

    while (static_cast<Eigen::Index>(plan.indices.size()) < K) {
        const Eigen::MatrixXd selected = select_rows(dict, plan).D;
        Eigen::BDCSVD<Eigen::MatrixXd> svd(selected, Eigen::ComputeThinV);
        const Eigen::VectorXd psi = svd.matrixV().col(M - 1);
        const Eigen::VectorXd scores = dict.rows * psi;
        int best = -1;
        double best_score = -1.0;
        for (Eigen::Index i = 0; i < L; ++i) {
            if (taken[static_cast<std::size_t>(i)]) continue;
            const double score = scores[i] * scores[i];
            if (score > best_score) {
                best_score = score;
                best = static_cast<int>(i);
            }
        }
        plan.indices.push_back(best);
        taken[static_cast<std::size_t>(best)] = true;
        plan.s_min_history.push_back(s_min(select_rows(dict, plan).D));
    }
    return plan;
}

/// Provable floor on the s_min^2 increase from appending a rotated candidate
/// row, given the gap g between the two smallest squared singular values.
/// Diagnostic only: the greedy criterion above is the simplified form, since
/// this expression cancels catastrophically when the last component is small.
inline double lower_bound_gain(double g, const Eigen::VectorXd &d_plus_rotated) {
    if (g < 0.0) throw PreconditionError("lower_bound_gain: gap must be nonnegative");
    if (d_plus_rotated.size() == 0) throw PreconditionError("lower_bound_gain: empty row");
    const double norm2 = d_plus_rotated.squaredNorm();
    const double last = d_plus_rotated(d_plus_rotated.size() - 1);
    double radicand = (g + norm2) * (g + norm2) - 4.0 * g * last * last;
    if (radicand < 0.0) radicand = 0.0; // rounding can push it just below zero
    return 0.5 * (g + norm2 - std::sqrt(radicand));
}

/// Near-equidistant baseline: K indices round(offset + i (L-1)/(K-1)),
/// deduplicated forward, returned sorted. The index arithmetic is a fixed
/// convention of this artifact.
inline SelectionPlan equidistant_selection(Eigen::Index L, Eigen::Index K, Eigen::Index offset = 0) {
    if (K < 1 || K > L) throw PreconditionError("equidistant_selection: need 1 <= K <= L");
    std::vector<bool> taken(static_cast<std::size_t>(L), false);
    SelectionPlan plan;
    plan.indices.reserve(static_cast<std::size_t>(K));
    const double stride = K > 1 ? static_cast<double>(L - 1) / static_cast<double>(K - 1) : 0.0;
    for (Eigen::Index i = 0; i < K; ++i) {
        long idx = std::lround(static_cast<double>(offset) + static_cast<double>(i) * stride);
        idx = std::clamp(idx, 0L, static_cast<long>(L - 1));
        long candidate = idx;
        while (candidate < L && taken[static_cast<std::size_t>(candidate)]) ++candidate;
        if (candidate == L) {
            candidate = idx - 1;
            while (candidate >= 0 && taken[static_cast<std::size_t>(candidate)]) --candidate;
        }
        taken[static_cast<std::size_t>(candidate)] = true;
        plan.indices.push_back(static_cast<int>(candidate));
    }
    std::sort(plan.indices.begin(), plan.indices.end());
    return plan;
}

} // namespace opinf
