#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace uconv {

using cplx = std::complex<double>;

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense complex matrix stored as separate row-major real and imaginary arrays.
///
/// Keeping the two parts apart means every downstream computation (including
/// reverse-mode gradients) works on plain real arrays.
struct ComplexDense {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> re;
    std::vector<double> im;

    ComplexDense() = default;
    ComplexDense(std::size_t r, std::size_t c) : rows(r), cols(c), re(r * c, 0.0), im(r * c, 0.0) {}

    static ComplexDense identity(std::size_t n);
    static ComplexDense from_real(std::size_t r, std::size_t c, std::vector<double> values);
    static ComplexDense from_rows(const std::vector<std::vector<cplx>>& rows);

    [[nodiscard]] std::size_t size() const { return rows * cols; }
    [[nodiscard]] cplx operator()(std::size_t r, std::size_t c) const {
        return {re[r * cols + c], im[r * cols + c]};
    }
    void set(std::size_t r, std::size_t c, cplx v) {
        re[r * cols + c] = v.real();
        im[r * cols + c] = v.imag();
    }
};

/// Real CSR matrix. Column indices are sorted within each row and explicit
/// zeros are never stored.
struct SparseReal {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> col_idx;
    std::vector<double> values;
    bool symmetric = false;

    struct Triplet {
        std::size_t row;
        std::size_t col;
        double value;
    };

    SparseReal() = default;
    SparseReal(std::size_t r, std::size_t c) : rows(r), cols(c), row_ptr(r + 1, 0) {}

    /// Duplicate coordinates are summed; entries that end up zero are dropped.
    static SparseReal from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets);
    static SparseReal identity(std::size_t n);

    [[nodiscard]] std::size_t nnz() const { return values.size(); }
    [[nodiscard]] double at(std::size_t r, std::size_t c) const;
    [[nodiscard]] SparseReal transpose() const;
    [[nodiscard]] bool is_structurally_symmetric(double tol = 0.0) const;
    [[nodiscard]] std::vector<std::vector<double>> to_dense() const;
};

ComplexDense matmul(const ComplexDense& a, const ComplexDense& b);
ComplexDense spmm(const SparseReal& s, const ComplexDense& x);
ComplexDense conj_transpose(const ComplexDense& a);
double frobenius_norm(const ComplexDense& a);
ComplexDense skew_hermitian_project(const ComplexDense& m);

/// Spectral-norm estimate for a symmetric sparse matrix by power iteration.
/// Always a lower bound on the exact norm (up to round-off).
double operator_norm_estimate(const SparseReal& s, int iterations = 200, std::uint64_t seed = 0x5eed);

ComplexDense add(const ComplexDense& a, const ComplexDense& b);
ComplexDense sub(const ComplexDense& a, const ComplexDense& b);
ComplexDense scale(const ComplexDense& a, double s);
ComplexDense scale(const ComplexDense& a, cplx s);
/// Sum over all entries of conj(a) * b.
cplx inner(const ComplexDense& a, const ComplexDense& b);
double max_abs_diff(const ComplexDense& a, const ComplexDense& b);

/// Dense LU solve A X = B with partial pivoting. Throws NumericError when A is
/// numerically singular.
ComplexDense lu_solve(const ComplexDense& a, const ComplexDense& b);

/// Permutation matrix P with P e_j = e_{perm[j]}.
SparseReal permutation_matrix(const std::vector<std::size_t>& perm);

/// Block-diagonal stacking of square or rectangular sparse blocks.
SparseReal block_diagonal(const std::vector<const SparseReal*>& blocks);

}  // namespace uconv
