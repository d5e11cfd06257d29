#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "opinf/errors.hpp"
#include "opinf/montecarlo.hpp"
#include "opinf/selection.hpp"

namespace opinf {

// Dense binary matrix format: magic "OPIF", u32 version, u64 rows, u64 cols,
// then column-major 64-bit floats. All fields little-endian; round-trips are
// bit-exact.
inline constexpr std::uint32_t kMatrixFormatVersion = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "matrix file I/O assumes a little-endian host");

template <typename T> void write_pod(std::ostream &out, const T &value) {
    out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T> T read_pod(std::istream &in) {
    T value;
    in.read(reinterpret_cast<char *>(&value), sizeof(T));
    if (!in) throw std::runtime_error("matrix file truncated");
    return value;
}

} // namespace detail

/// Write through a temp file in the same directory, then rename into place,
/// so a crash can never leave a half-written artifact behind.
inline void atomic_write_file(const std::filesystem::path &path,
                              const std::function<void(std::ostream &)> &producer) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        producer(out);
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_matrix(const std::filesystem::path &path, const Eigen::MatrixXd &m) {
    atomic_write_file(path, [&](std::ostream &out) {
        out.write("OPIF", 4);
        detail::write_pod(out, kMatrixFormatVersion);
        detail::write_pod(out, static_cast<std::uint64_t>(m.rows()));
        detail::write_pod(out, static_cast<std::uint64_t>(m.cols()));
        out.write(reinterpret_cast<const char *>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    });
}

inline Eigen::MatrixXd read_matrix(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "OPIF", 4) != 0)
        throw std::runtime_error(path.string() + ": not a matrix file (bad magic)");
    const auto version = detail::read_pod<std::uint32_t>(in);
    if (version != kMatrixFormatVersion)
        throw std::runtime_error(path.string() + ": unsupported matrix file version " + std::to_string(version));
    const auto rows = detail::read_pod<std::uint64_t>(in);
    const auto cols = detail::read_pod<std::uint64_t>(in);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    in.read(reinterpret_cast<char *>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) throw std::runtime_error(path.string() + ": truncated matrix payload");
    return m;
}

namespace detail {

// Shortest round-trip decimal representation.
inline std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

} // namespace detail

/// CSV export of an evaluation report, one row per time step:
/// time_step,bias,bias_se,mse,mse_se,sigma,s_min,nsr,R_used,R_unstable
inline void write_eval_report_csv(const std::filesystem::path &path, const EvalReport &report) {
    atomic_write_file(path, [&](std::ostream &out) {
        out << "time_step,bias,bias_se,mse,mse_se,sigma,s_min,nsr,R_used,R_unstable\n";
        for (int k = 0; k < report.steps(); ++k) {
            out << (k + 1) << ',' << detail::fmt(report.bias[static_cast<std::size_t>(k)]) << ','
                << detail::fmt(report.bias_se[static_cast<std::size_t>(k)]) << ','
                << detail::fmt(report.mse[static_cast<std::size_t>(k)]) << ','
                << detail::fmt(report.mse_se[static_cast<std::size_t>(k)]) << ',' << detail::fmt(report.sigma) << ','
                << detail::fmt(report.s_min) << ',' << detail::fmt(report.noise_to_signal) << ','
                << report.replicates_used << ',' << report.replicates_unstable << '\n';
        }
    });
}

/// CSV export of a selection plan: position m (1-based), dictionary row, and
/// s_min(P_m^T D) where recorded (the history starts once m reaches the
/// column count).
inline void write_selection_csv(const std::filesystem::path &path, const SelectionPlan &plan) {
    atomic_write_file(path, [&](std::ostream &out) {
        out << "m,row_index,s_min\n";
        const std::size_t K = plan.indices.size();
        const std::size_t history_start = K - plan.s_min_history.size();
        for (std::size_t i = 0; i < K; ++i) {
            out << (i + 1) << ',' << plan.indices[i] << ',';
            if (i >= history_start) out << detail::fmt(plan.s_min_history[i - history_start]);
            out << '\n';
        }
    });
}

inline SelectionPlan read_selection_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    SelectionPlan plan;
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::getline(row, field, ',');
        std::getline(row, field, ',');
        plan.indices.push_back(std::stoi(field));
        if (std::getline(row, field, ',') && !field.empty()) plan.s_min_history.push_back(std::stod(field));
    }
    return plan;
}

/// CSV export of a trajectory, one row per time step.
inline void write_trajectory_csv(const std::filesystem::path &path, const Trajectory &traj) {
    atomic_write_file(path, [&](std::ostream &out) {
        out << "time_step";
        for (Eigen::Index i = 0; i < traj.states.rows(); ++i) out << ",x" << i;
        out << '\n';
        for (Eigen::Index k = 0; k < traj.states.cols(); ++k) {
            out << k;
            for (Eigen::Index i = 0; i < traj.states.rows(); ++i) out << ',' << detail::fmt(traj.states(i, k));
            out << '\n';
        }
    });
}

} // namespace opinf
