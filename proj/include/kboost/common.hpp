#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace kboost {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error categories used to pick CLI exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Relative eigenvalue cutoff: directions with d_i^2 <= rank_tol * max_j d_j^2
// are treated as null space everywhere (factorization, pseudo-inverses,
// reduced designs).
inline constexpr double kRankTol = 1e-12;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream key for Monte Carlo run `run` under master seed `seed`; runs get
// independent, reproducible generators regardless of execution order.
inline std::uint64_t run_seed(std::uint64_t seed, std::uint64_t run) {
    return splitmix64(splitmix64(seed) ^ (0x517cc1b727220a95ULL * (run + 1)));
}

}  // namespace kboost
