#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "uconv/numerics.hpp"

namespace testing_support {

using uconv::ComplexDense;
using uconv::cplx;
using uconv::SparseReal;

inline ComplexDense random_complex(std::size_t r, std::size_t c, std::uint64_t seed, double sigma = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    ComplexDense x(r, c);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x.re[i] = g(rng);
        x.im[i] = g(rng);
    }
    return x;
}

inline ComplexDense random_real(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexDense x(r, c);
    for (double& v : x.re) v = g(rng);
    return x;
}

// Dense complex matrix as std::complex, for naive oracles.
using Dense = std::vector<std::vector<cplx>>;

inline Dense to_dense(const ComplexDense& a) {
    Dense d(a.rows, std::vector<cplx>(a.cols));
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) d[i][j] = a(i, j);
    }
    return d;
}

inline Dense to_dense(const SparseReal& s) {
    Dense d(s.rows, std::vector<cplx>(s.cols));
    for (std::size_t i = 0; i < s.rows; ++i) {
        for (std::size_t j = 0; j < s.cols; ++j) d[i][j] = s.at(i, j);
    }
    return d;
}

inline ComplexDense from_dense(const Dense& d) { return ComplexDense::from_rows(d); }

inline Dense naive_mul(const Dense& a, const Dense& b) {
    Dense c(a.size(), std::vector<cplx>(b.empty() ? 0 : b[0].size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < c[i].size(); ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < b.size(); ++k) s += a[i][k] * b[k][j];
            c[i][j] = s;
        }
    }
    return c;
}

inline double max_diff(const Dense& a, const Dense& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
    }
    return m;
}

// Dense exp by a long Taylor series with scaling and squaring; independent of
// the library's truncated action.
inline Dense dense_expm(Dense a) {
    const std::size_t n = a.size();
    double norm = 0.0;
    for (const auto& row : a) {
        for (const auto& v : row) norm += std::norm(v);
    }
    norm = std::sqrt(norm);
    int squarings = 0;
    while (norm > 0.25) {
        norm /= 2.0;
        ++squarings;
    }
    const double s = std::ldexp(1.0, -squarings);
    for (auto& row : a) {
        for (auto& v : row) v *= s;
    }
    Dense result(n, std::vector<cplx>(n));
    Dense term(n, std::vector<cplx>(n));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
    for (int k = 1; k <= 30; ++k) {
        term = naive_mul(term, a);
        for (auto& row : term) {
            for (auto& v : row) v /= static_cast<double>(k);
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
        }
    }
    for (int q = 0; q < squarings; ++q) result = naive_mul(result, result);
    return result;
}

}  // namespace testing_support
