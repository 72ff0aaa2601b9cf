// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace cogpilot {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Thrown when an iterative solve exhausts its iteration budget.
// Carries the final bracket so the caller can inspect how close it got.
struct ConvergenceError : std::runtime_error {
    double bracket_lo;
    double bracket_hi;
    ConvergenceError(const std::string& msg, double lo, double hi)
        : std::runtime_error(msg), bracket_lo(lo), bracket_hi(hi) {}
};

struct NumericalDomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// splitmix64; used to derive independent per-trial seeds from a master
// seed plus an index tuple, so results do not depend on scheduling.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t s = mix_seed(master ^ mix_seed(a));
    s = mix_seed(s ^ mix_seed(b + 0x2545f4914f6cdd1dULL));
    return mix_seed(s ^ mix_seed(c + 0x632be59bd9b4e019ULL));
}

// One draw of a standard circularly-symmetric complex Gaussian
// (unit variance split evenly between real and imaginary parts).
inline cdouble standard_cn(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(2.0));
    return {n(rng), n(rng)};
}

inline CVector standard_cn_vector(Eigen::Index m, Rng& rng) {
    CVector v(m);
    for (Eigen::Index i = 0; i < m; ++i) v(i) = standard_cn(rng);
    return v;
}

}  // namespace cogpilot
