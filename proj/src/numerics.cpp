#include "uconv/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace uconv {

namespace {

void require_same_shape(const ComplexDense& a, const ComplexDense& b, const char* what) {
    if (a.rows != b.rows || a.cols != b.cols) {
        throw ShapeError(std::string(what) + ": shape mismatch " + std::to_string(a.rows) + "x" +
                         std::to_string(a.cols) + " vs " + std::to_string(b.rows) + "x" +
                         std::to_string(b.cols));
    }
}

}  // namespace

ComplexDense ComplexDense::identity(std::size_t n) {
    ComplexDense out(n, n);
    for (std::size_t i = 0; i < n; ++i) out.re[i * n + i] = 1.0;
    return out;
}

ComplexDense ComplexDense::from_real(std::size_t r, std::size_t c, std::vector<double> values) {
    if (values.size() != r * c) throw ShapeError("from_real: value count does not match shape");
    ComplexDense out;
    out.rows = r;
    out.cols = c;
    out.re = std::move(values);
    out.im.assign(r * c, 0.0);
    return out;
}

ComplexDense ComplexDense::from_rows(const std::vector<std::vector<cplx>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    ComplexDense out(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) throw ShapeError("from_rows: ragged rows");
        for (std::size_t j = 0; j < c; ++j) out.set(i, j, rows[i][j]);
    }
    return out;
}

SparseReal SparseReal::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
        if (t.row >= rows || t.col >= cols) throw InputError("from_triplets: index out of range");
    }
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseReal out(rows, cols);
    std::size_t i = 0;
    while (i < triplets.size()) {
        const std::size_t r = triplets[i].row;
        const std::size_t c = triplets[i].col;
        double v = 0.0;
        while (i < triplets.size() && triplets[i].row == r && triplets[i].col == c) {
            v += triplets[i].value;
            ++i;
        }
        if (v != 0.0) {
            out.col_idx.push_back(c);
            out.values.push_back(v);
            ++out.row_ptr[r + 1];
        }
    }
    for (std::size_t r = 0; r < rows; ++r) out.row_ptr[r + 1] += out.row_ptr[r];
    out.symmetric = rows == cols && out.is_structurally_symmetric();
    return out;
}

SparseReal SparseReal::identity(std::size_t n) {
    SparseReal out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out.col_idx.push_back(i);
        out.values.push_back(1.0);
        out.row_ptr[i + 1] = i + 1;
    }
    out.symmetric = true;
    return out;
}

double SparseReal::at(std::size_t r, std::size_t c) const {
    const auto first = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r]);
    const auto last = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[r + 1]);
    const auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return values[static_cast<std::size_t>(it - col_idx.begin())];
}

SparseReal SparseReal::transpose() const {
    std::vector<Triplet> t;
    t.reserve(nnz());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) t.push_back({col_idx[k], r, values[k]});
    }
    return from_triplets(cols, rows, std::move(t));
}

bool SparseReal::is_structurally_symmetric(double tol) const {
    if (rows != cols) return false;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
            if (std::abs(at(col_idx[k], r) - values[k]) > tol) return false;
        }
    }
    return true;
}

std::vector<std::vector<double>> SparseReal::to_dense() const {
    std::vector<std::vector<double>> out(rows, std::vector<double>(cols, 0.0));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out[r][col_idx[k]] = values[k];
    }
    return out;
}

ComplexDense matmul(const ComplexDense& a, const ComplexDense& b) {
    if (a.cols != b.rows) {
        throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols) + " and " +
                         std::to_string(b.rows) + " disagree");
    }
    ComplexDense out(a.rows, b.cols);
    const std::size_t n = b.cols;
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ore = out.re.data() + i * n;
        double* oim = out.im.data() + i * n;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double ar = a.re[i * a.cols + k];
            const double ai = a.im[i * a.cols + k];
            if (ar == 0.0 && ai == 0.0) continue;
            const double* bre = b.re.data() + k * n;
            const double* bim = b.im.data() + k * n;
            for (std::size_t j = 0; j < n; ++j) {
                ore[j] += ar * bre[j] - ai * bim[j];
                oim[j] += ar * bim[j] + ai * bre[j];
            }
        }
    }
    return out;
}

ComplexDense spmm(const SparseReal& s, const ComplexDense& x) {
    if (s.cols != x.rows) {
        throw ShapeError("spmm: sparse cols " + std::to_string(s.cols) + " != dense rows " +
                         std::to_string(x.rows));
    }
    ComplexDense out(s.rows, x.cols);
    const std::size_t d = x.cols;
    for (std::size_t r = 0; r < s.rows; ++r) {
        double* ore = out.re.data() + r * d;
        double* oim = out.im.data() + r * d;
        for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
            const double v = s.values[k];
            const double* xre = x.re.data() + s.col_idx[k] * d;
            const double* xim = x.im.data() + s.col_idx[k] * d;
            for (std::size_t j = 0; j < d; ++j) {
                ore[j] += v * xre[j];
                oim[j] += v * xim[j];
            }
        }
    }
    return out;
}

ComplexDense conj_transpose(const ComplexDense& a) {
    ComplexDense out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            out.re[j * a.rows + i] = a.re[i * a.cols + j];
            out.im[j * a.rows + i] = -a.im[i * a.cols + j];
        }
    }
    return out;
}

double frobenius_norm(const ComplexDense& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a.re[i] * a.re[i] + a.im[i] * a.im[i];
    return std::sqrt(s);
}

ComplexDense skew_hermitian_project(const ComplexDense& m) {
    if (m.rows != m.cols) throw ShapeError("skew_hermitian_project: matrix is not square");
    const std::size_t n = m.rows;
    ComplexDense out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // (M - M^dagger)/2: real part antisymmetric, imaginary part symmetric.
            out.re[i * n + j] = 0.5 * (m.re[i * n + j] - m.re[j * n + i]);
            out.im[i * n + j] = 0.5 * (m.im[i * n + j] + m.im[j * n + i]);
        }
    }
    return out;
}

double operator_norm_estimate(const SparseReal& s, int iterations, std::uint64_t seed) {
    if (s.rows != s.cols) throw ShapeError("operator_norm_estimate: matrix is not square");
    const std::size_t n = s.rows;
    if (n == 0 || s.nnz() == 0) return 0.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    // Start near the Perron vector of a nonnegative matrix, plus a seeded
    // perturbation so no eigendirection is missed.
    std::vector<double> v(n);
    for (std::size_t r = 0; r < n; ++r) {
        double row_abs = 0.0;
        for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) row_abs += std::abs(s.values[k]);
        v[r] = std::sqrt(row_abs) + 0.01 * unif(rng);
    }
    auto normalize = [](std::vector<double>& x) {
        double nrm = 0.0;
        for (double e : x) nrm += e * e;
        nrm = std::sqrt(nrm);
        if (nrm > 0.0) {
            for (double& e : x) e /= nrm;
        }
        return nrm;
    };
    normalize(v);
    std::vector<double> w(n);
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double acc = 0.0;
            for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) acc += s.values[k] * v[s.col_idx[k]];
            w[r] = acc;
        }
        estimate = normalize(w);
        if (estimate == 0.0) return 0.0;
        v.swap(w);
    }
    return estimate;
}

ComplexDense add(const ComplexDense& a, const ComplexDense& b) {
    require_same_shape(a, b, "add");
    ComplexDense out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.re[i] += b.re[i];
        out.im[i] += b.im[i];
    }
    return out;
}

ComplexDense sub(const ComplexDense& a, const ComplexDense& b) {
    require_same_shape(a, b, "sub");
    ComplexDense out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.re[i] -= b.re[i];
        out.im[i] -= b.im[i];
    }
    return out;
}

ComplexDense scale(const ComplexDense& a, double s) {
    ComplexDense out = a;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out.re[i] *= s;
        out.im[i] *= s;
    }
    return out;
}

ComplexDense scale(const ComplexDense& a, cplx s) {
    ComplexDense out(a.rows, a.cols);
    for (std::size_t i = 0; i < a.size(); ++i) {
        out.re[i] = s.real() * a.re[i] - s.imag() * a.im[i];
        out.im[i] = s.real() * a.im[i] + s.imag() * a.re[i];
    }
    return out;
}

cplx inner(const ComplexDense& a, const ComplexDense& b) {
    require_same_shape(a, b, "inner");
    double r = 0.0;
    double i = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        r += a.re[k] * b.re[k] + a.im[k] * b.im[k];
        i += a.re[k] * b.im[k] - a.im[k] * b.re[k];
    }
    return {r, i};
}

double max_abs_diff(const ComplexDense& a, const ComplexDense& b) {
    require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        m = std::max(m, std::hypot(a.re[k] - b.re[k], a.im[k] - b.im[k]));
    }
    return m;
}

ComplexDense lu_solve(const ComplexDense& a, const ComplexDense& b) {
    if (a.rows != a.cols) throw ShapeError("lu_solve: matrix is not square");
    if (b.rows != a.rows) throw ShapeError("lu_solve: right-hand side row count mismatch");
    const std::size_t n = a.rows;
    const std::size_t m = b.cols;
    std::vector<cplx> lu(n * n);
    std::vector<cplx> rhs(n * m);
    double scale_ref = 0.0;
    for (std::size_t i = 0; i < n * n; ++i) {
        lu[i] = {a.re[i], a.im[i]};
        scale_ref = std::max(scale_ref, std::abs(lu[i]));
    }
    for (std::size_t i = 0; i < n * m; ++i) rhs[i] = {b.re[i], b.im[i]};

    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(lu[r * n + k]) > std::abs(lu[piv * n + k])) piv = r;
        }
        const double pmag = std::abs(lu[piv * n + k]);
        max_pivot = std::max(max_pivot, pmag);
        min_pivot = std::min(min_pivot, pmag);
        if (pmag <= 1e-14 * std::max(scale_ref, 1.0)) {
            const double cond = pmag > 0.0 ? max_pivot / pmag : std::numeric_limits<double>::infinity();
            throw NumericError("lu_solve: matrix is singular to working precision (pivot ratio condition estimate " +
                               std::to_string(cond) + ")");
        }
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu[k * n + c], lu[piv * n + c]);
            for (std::size_t c = 0; c < m; ++c) std::swap(rhs[k * m + c], rhs[piv * m + c]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const cplx f = lu[r * n + k] / lu[k * n + k];
            if (f == cplx{}) continue;
            for (std::size_t c = k; c < n; ++c) lu[r * n + c] -= f * lu[k * n + c];
            for (std::size_t c = 0; c < m; ++c) rhs[r * m + c] -= f * rhs[k * m + c];
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t c = 0; c < m; ++c) {
            cplx acc = rhs[kk * m + c];
            for (std::size_t j = kk + 1; j < n; ++j) acc -= lu[kk * n + j] * rhs[j * m + c];
            rhs[kk * m + c] = acc / lu[kk * n + kk];
        }
    }
    ComplexDense out(n, m);
    for (std::size_t i = 0; i < n * m; ++i) {
        out.re[i] = rhs[i].real();
        out.im[i] = rhs[i].imag();
    }
    return out;
}

SparseReal permutation_matrix(const std::vector<std::size_t>& perm) {
    const std::size_t n = perm.size();
    std::vector<SparseReal::Triplet> t;
    t.reserve(n);
    std::vector<bool> seen(n, false);
    for (std::size_t j = 0; j < n; ++j) {
        if (perm[j] >= n || seen[perm[j]]) throw InputError("permutation_matrix: not a permutation");
        seen[perm[j]] = true;
        t.push_back({perm[j], j, 1.0});
    }
    return SparseReal::from_triplets(n, n, std::move(t));
}

SparseReal block_diagonal(const std::vector<const SparseReal*>& blocks) {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t nnz = 0;
    bool symmetric = true;
    for (const auto* b : blocks) {
        rows += b->rows;
        cols += b->cols;
        nnz += b->nnz();
        symmetric = symmetric && b->symmetric;
    }
    SparseReal out(rows, cols);
    out.col_idx.reserve(nnz);
    out.values.reserve(nnz);
    std::size_t r0 = 0;
    std::size_t c0 = 0;
    for (const auto* b : blocks) {
        for (std::size_t r = 0; r < b->rows; ++r) {
            for (std::size_t k = b->row_ptr[r]; k < b->row_ptr[r + 1]; ++k) {
                out.col_idx.push_back(c0 + b->col_idx[k]);
                out.values.push_back(b->values[k]);
            }
            out.row_ptr[r0 + r + 1] = out.col_idx.size();
        }
        r0 += b->rows;
        c0 += b->cols;
    }
    out.symmetric = symmetric && rows == cols;
    return out;
}

}  // namespace uconv
