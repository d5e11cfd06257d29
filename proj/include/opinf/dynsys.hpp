#pragma once

#include <memory>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "opinf/errors.hpp"
#include "opinf/kron.hpp"
#include "opinf/rng.hpp"

namespace opinf {

/// Discrete-time polynomial system x_{k+1} = sum_j A_j x_k^j + B u_k, with
/// A_j acting on the compressed (unique-monomial) j-th power. Operators are
/// stored sparse; the benchmark systems of interest have O(N) structure.
/// Immutable after construction and shareable across threads.
class PolynomialSystem {
  public:
    PolynomialSystem(std::vector<SparseMatrix> ops, Eigen::MatrixXd input_map)
        : ops_(std::move(ops)), input_map_(std::move(input_map)) {
        if (ops_.empty()) throw PreconditionError("PolynomialSystem: at least one operator required");
        const Eigen::Index N = ops_[0].rows();
        for (std::size_t j = 0; j < ops_.size(); ++j) {
            if (ops_[j].rows() != N) throw PreconditionError("PolynomialSystem: inconsistent operator row counts");
            const auto expected = unique_monomial_count(static_cast<int>(N), static_cast<int>(j) + 1);
            if (static_cast<std::uint64_t>(ops_[j].cols()) != expected)
                throw PreconditionError("PolynomialSystem: operator column count != unique_monomial_count(N, j)");
        }
        if (input_map_.size() > 0 && input_map_.rows() != N)
            throw PreconditionError("PolynomialSystem: input map row count != state dimension");
        for (std::size_t j = 1; j < ops_.size(); ++j)
            indices_.push_back(std::make_shared<const MonomialIndex>(static_cast<int>(N), static_cast<int>(j) + 1));
    }

    explicit PolynomialSystem(std::vector<SparseMatrix> ops)
        : PolynomialSystem(std::move(ops), Eigen::MatrixXd()) {}

    Eigen::Index state_dim() const { return ops_[0].rows(); }
    Eigen::Index input_dim() const { return input_map_.size() > 0 ? input_map_.cols() : 0; }
    int order() const { return static_cast<int>(ops_.size()); }
    const SparseMatrix &op(int j) const { return ops_[static_cast<std::size_t>(j - 1)]; }
    const Eigen::MatrixXd &input_map() const { return input_map_; }
    bool autonomous() const { return input_dim() == 0; }

    /// One noise-free step. For autonomous systems pass an empty input.
    Eigen::VectorXd step(const Eigen::VectorXd &x, const Eigen::VectorXd &u = Eigen::VectorXd()) const {
        if (x.size() != state_dim()) throw PreconditionError("step: state dimension mismatch");
        Eigen::VectorXd next = ops_[0] * x;
        for (std::size_t j = 1; j < ops_.size(); ++j) next += ops_[j] * compressed_power(x, *indices_[j - 1]);
        if (!autonomous()) {
            if (u.size() != input_dim()) throw PreconditionError("step: input dimension mismatch");
            next += input_map_ * u;
        } else if (u.size() != 0) {
            throw PreconditionError("step: input supplied to autonomous system");
        }
        return next;
    }

  private:
    std::vector<SparseMatrix> ops_;
    Eigen::MatrixXd input_map_;
    std::vector<std::shared_ptr<const MonomialIndex>> indices_;
};

/// Additive Gaussian state noise: xi_k ~ N(0, sigma^2 I), one independent
/// stream per seed.
struct NoiseModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// A live draw stream for a NoiseModel. Owned by a single caller at a time.
class NoiseStream {
  public:
    explicit NoiseStream(const NoiseModel &model) : rng_(model.seed), sigma_(model.sigma) {
        if (model.sigma < 0.0) throw PreconditionError("NoiseStream: sigma must be nonnegative");
    }

    double sigma() const { return sigma_; }

    /// Next noise vector; an exact zero vector when sigma == 0 (the stream
    /// does not advance in that case, so sigma = 0 degenerates bit-exactly).
    Eigen::VectorXd draw(Eigen::Index n) {
        if (sigma_ == 0.0) return Eigen::VectorXd::Zero(n);
        return rng_.normal_vector(n, sigma_);
    }

  private:
    Rng rng_;
    double sigma_;
};

inline Eigen::VectorXd step_noisy(const PolynomialSystem &sys, const Eigen::VectorXd &x, const Eigen::VectorXd &u,
                                  NoiseStream &noise) {
    return sys.step(x, u) + noise.draw(sys.state_dim());
}

inline Eigen::VectorXd step_noisy(const PolynomialSystem &sys, const Eigen::VectorXd &x, NoiseStream &noise) {
    return step_noisy(sys, x, Eigen::VectorXd(), noise);
}

/// States (one column per time step, K+1 columns including the initial
/// state), inputs (one column per step taken), and the step size used for
/// bookkeeping; the systems themselves are discrete-time.
struct Trajectory {
    Eigen::MatrixXd states;
    Eigen::MatrixXd inputs;
    double dt = 1.0;

    Eigen::Index steps() const { return states.cols() - 1; }
};

inline Trajectory simulate(const PolynomialSystem &sys, const Eigen::VectorXd &x0, const Eigen::MatrixXd &inputs,
                           Eigen::Index K, NoiseStream *noise = nullptr, double dt = 1.0) {
    if (x0.size() != sys.state_dim()) throw PreconditionError("simulate: initial state dimension mismatch");
    if (!sys.autonomous() && inputs.cols() < K)
        throw PreconditionError("simulate: fewer input columns than requested steps");
    Trajectory traj;
    traj.dt = dt;
    traj.states.resize(sys.state_dim(), K + 1);
    traj.inputs = sys.autonomous() ? Eigen::MatrixXd(0, K) : Eigen::MatrixXd(inputs.leftCols(K));
    traj.states.col(0) = x0;
    Eigen::VectorXd x = x0;
    for (Eigen::Index k = 0; k < K; ++k) {
        const Eigen::VectorXd u = sys.autonomous() ? Eigen::VectorXd() : Eigen::VectorXd(inputs.col(k));
        x = sys.step(x, u);
        if (noise != nullptr) x += noise->draw(sys.state_dim());
        traj.states.col(k + 1) = x;
    }
    return traj;
}

inline Trajectory simulate(const PolynomialSystem &sys, const Eigen::VectorXd &x0, Eigen::Index K,
                           NoiseStream *noise = nullptr, double dt = 1.0) {
    return simulate(sys, x0, Eigen::MatrixXd(0, K), K, noise, dt);
}

} // namespace opinf
