#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace opinf {

namespace detail {

// SplitMix64 finalizer (Steele/Lea/Flood). Used to spread seed material and
// to derive independent substream seeds; the stream itself is mt19937_64.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace detail

/// Seedable, splittable random stream: mt19937_64 under the hood, uniforms
/// from the top 53 bits, normals via Box-Muller. Both transforms are fixed
/// here rather than delegated to <random> distributions (whose output is
/// implementation-defined), so identical seeds give bit-identical streams on
/// any conforming platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(detail::mix64(seed)) {}

    /// Deterministically derive the seed of an independent substream.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t key) {
        return detail::mix64(detail::mix64(seed) ^ detail::mix64(key + 0x632be59bd9b4e019ULL));
    }

    /// Independent stream keyed off this stream's seed; does not advance this stream.
    Rng substream(std::uint64_t key) const { return Rng(derive(seed_, key)); }

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller, one spare cached per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] keeps the log finite.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925287 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n, double sigma = 1.0) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = sigma * normal();
        return v;
    }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace opinf
