#pragma once

#include "kboost/common.hpp"

#include <algorithm>
#include <random>

// Shared draw helpers for the test suites. Relational checks only ever
// compare two code paths on the same draws, so the exact distribution
// internals of the standard library do not matter.
namespace testutil {

using kboost::Index;
using kboost::Matrix;
using kboost::Vector;

inline Matrix random_matrix(std::mt19937_64& gen, Index rows, Index cols) {
    std::normal_distribution<double> n;
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = n(gen);
    return m;
}

inline Vector random_vector(std::mt19937_64& gen, Index size) {
    std::normal_distribution<double> n;
    Vector v(size);
    for (Index i = 0; i < size; ++i) v[i] = n(gen);
    return v;
}

inline Matrix random_psd(std::mt19937_64& gen, Index m) {
    const Matrix a = random_matrix(gen, m, m);
    return a * a.transpose() / double(m);
}

inline double log_uniform(std::mt19937_64& gen, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    return std::exp(u(gen));
}

inline double rel_err(const Vector& a, const Vector& b) {
    const double scale = std::max(a.norm(), b.norm());
    return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline double rel_err(const Matrix& a, const Matrix& b) {
    const double scale = std::max(a.norm(), b.norm());
    return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

template <class F>
inline std::string thrown_message(F&& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace testutil
