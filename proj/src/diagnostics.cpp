#include "uconv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <random>
#include <thread>

#include "uconv/graphs.hpp"

namespace uconv {

namespace {

double pairwise_sum(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += v[i];
        return s;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

double trace_square(const SparseReal& a) {
    const SparseReal at = a.transpose();
    double tr = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) tr += a.values[k] * at.at(i, a.col_idx[k]);
    }
    return tr;
}

double trace_cube(const SparseReal& a) {
    const SparseReal at = a.transpose();
    std::vector<double> col(a.cols, 0.0);
    double tr = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        // col[j] = A_ji
        for (std::size_t k = at.row_ptr[i]; k < at.row_ptr[i + 1]; ++k) col[at.col_idx[k]] = at.values[k];
        for (std::size_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
            const std::size_t k = a.col_idx[p];
            for (std::size_t q = a.row_ptr[k]; q < a.row_ptr[k + 1]; ++q) {
                tr += a.values[p] * a.values[q] * col[a.col_idx[q]];
            }
        }
        for (std::size_t k = at.row_ptr[i]; k < at.row_ptr[i + 1]; ++k) col[at.col_idx[k]] = 0.0;
    }
    return tr;
}

std::vector<double> flatten(const ComplexDense& x) {
    std::vector<double> v(2 * x.size());
    for (std::size_t e = 0; e < x.size(); ++e) {
        v[2 * e] = x.re[e];
        v[2 * e + 1] = x.im[e];
    }
    return v;
}

RealMatrix gram_minus_identity(const RealMatrix& j) {
    RealMatrix g(j.cols, j.cols);
    for (std::size_t a = 0; a < j.cols; ++a) {
        for (std::size_t b = a; b < j.cols; ++b) {
            double s = 0.0;
            for (std::size_t r = 0; r < j.rows; ++r) s += j(r, a) * j(r, b);
            g(a, b) = s - (a == b ? 1.0 : 0.0);
            g(b, a) = g(a, b);
        }
    }
    return g;
}

}  // namespace

double dirichlet_energy(const ComplexDense& x, const SparseReal& a) {
    if (a.rows != x.rows || a.cols != x.rows) throw ShapeError("dirichlet_energy: adjacency/feature mismatch");
    const ComplexDense ax = spmm(a, x);
    const double n2 = frobenius_norm(x);
    return n2 * n2 - inner(x, ax).real();
}

double rayleigh_quotient(const ComplexDense& x, const SparseReal& a) {
    const double n = frobenius_norm(x);
    if (n == 0.0) throw InputError("rayleigh_quotient: undefined for X = 0");
    return dirichlet_energy(x, a) / (n * n);
}

ComplexDense apply_layer(const LayerParams& layer, const ComplexDense& x, const SparseReal& a, int order) {
    return std::visit(
        [&](const auto& p) -> ComplexDense {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, UniConvParams>) {
                return uniconv_forward(x, a, p, order);
            } else if constexpr (std::is_same_v<P, LieUniConvParams>) {
                return lie_uniconv_forward(x, a, p, order);
            } else {
                return vanilla_conv_forward(x, a, p);
            }
        },
        layer);
}

double rayleigh_invariance_check(const LayerParams& layer, const ComplexDense& x, const SparseReal& a, int order) {
    return std::abs(rayleigh_quotient(apply_layer(layer, x, a, order), a) - rayleigh_quotient(x, a));
}

double expected_rayleigh_vanilla(const SparseReal& a) {
    const double t2 = trace_square(a);
    if (t2 == 0.0) throw InputError("expected_rayleigh_vanilla: Tr(A^2) = 0 (graph has no edges)");
    return 1.0 - trace_cube(a) / t2;
}

ComplexDense random_orthogonal(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    // columns q_j, modified Gram-Schmidt; R_jj > 0 by construction
    std::vector<std::vector<double>> q(d, std::vector<double>(d));
    for (auto& col : q) {
        for (double& v : col) v = gauss(rng);
    }
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k < j; ++k) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += q[k][i] * q[j][i];
            for (std::size_t i = 0; i < d; ++i) q[j][i] -= dot * q[k][i];
        }
        double norm = 0.0;
        for (double v : q[j]) norm += v * v;
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericError("random_orthogonal: rank-deficient Gaussian draw");
        for (double& v : q[j]) v /= norm;
    }
    ComplexDense w(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) w.re[i * d + j] = q[j][i];
    }
    return w;
}

MonteCarloResult oversmoothing_monte_carlo(const SparseReal& a, std::size_t d, std::size_t n_trials,
                                           std::uint64_t seed, unsigned threads) {
    if (d == 0) throw InputError("oversmoothing_monte_carlo: d must be at least 1");
    if (n_trials == 0) throw InputError("oversmoothing_monte_carlo: need at least one trial");
    const std::size_t n = a.rows;
    std::vector<double> before(n_trials);
    std::vector<double> after(n_trials);
    auto run_trial = [&](std::size_t k) {
        const std::uint64_t s = mix_seed(seed ^ k);
        std::mt19937_64 rng(s);
        std::normal_distribution<double> gauss(0.0, 1.0);
        ComplexDense x(n, d);
        for (std::size_t r = 0; r < n; ++r) {
            double norm = 0.0;
            do {
                norm = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    x.re[r * d + c] = gauss(rng);
                    norm += x.re[r * d + c] * x.re[r * d + c];
                }
            } while (norm == 0.0);
            norm = std::sqrt(norm);
            for (std::size_t c = 0; c < d; ++c) x.re[r * d + c] /= norm;
        }
        const ComplexDense w = random_orthogonal(d, mix_seed(s + 1));
        before[k] = rayleigh_quotient(x, a);
        after[k] = rayleigh_quotient(matmul(spmm(a, x), w), a);
    };
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n_trials)));
    if (workers == 1) {
        for (std::size_t k = 0; k < n_trials; ++k) run_trial(k);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t k = w; k < n_trials; k += workers) run_trial(k);
            });
        }
        for (auto& t : pool) t.join();
    }
    MonteCarloResult r;
    r.trials = n_trials;
    r.mean_before = pairwise_sum(before, 0, n_trials) / static_cast<double>(n_trials);
    r.mean_after = pairwise_sum(after, 0, n_trials) / static_cast<double>(n_trials);
    return r;
}

double min_groupsort_gap(const ComplexDense& x) {
    if (x.cols % 2 != 0) throw ShapeError("min_groupsort_gap: feature dimension must be even");
    const std::size_t half = x.cols / 2;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t j = 0; j < half; ++j) {
            const std::size_t a = r * x.cols + j;
            gap = std::min({gap, std::abs(x.re[a] - x.re[a + half]), std::abs(x.im[a] - x.im[a + half])});
        }
    }
    return gap;
}

JacobianResult finite_difference_jacobian(const MatrixFunction& f, const ComplexDense& x, const JacobianOptions& opt) {
    JacobianResult res;
    res.point = x;
    if (opt.degenerate) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> unif(-opt.perturbation, opt.perturbation);
        int tries = 0;
        while (opt.degenerate(res.point)) {
            if (tries++ >= opt.max_perturbations) {
                throw NumericError("finite_difference_jacobian: point stays degenerate after perturbation");
            }
            std::cerr << "warning: degenerate Jacobian point (tied GroupSort pair), perturbing input\n";
            for (std::size_t i = 0; i < res.point.size(); ++i) {
                res.point.re[i] += unif(rng);
                res.point.im[i] += unif(rng);
            }
            res.perturbed = true;
        }
    }
    const std::size_t n_in = 2 * x.size();
    const std::size_t n_out = 2 * f(res.point).size();
    res.jacobian = RealMatrix(n_out, n_in);
    ComplexDense work = res.point;
    for (std::size_t c = 0; c < n_in; ++c) {
        double& coord = (c % 2 == 0) ? work.re[c / 2] : work.im[c / 2];
        const double saved = coord;
        coord = saved + opt.eps;
        const std::vector<double> fp = flatten(f(work));
        coord = saved - opt.eps;
        const std::vector<double> fm = flatten(f(work));
        coord = saved;
        for (std::size_t r = 0; r < n_out; ++r) res.jacobian(r, c) = (fp[r] - fm[r]) / (2.0 * opt.eps);
    }
    return res;
}

double jacobian_isometry_gap(const MatrixFunction& f, const ComplexDense& x, const JacobianOptions& opt) {
    return symmetric_operator_norm(gram_minus_identity(finite_difference_jacobian(f, x, opt).jacobian));
}

std::vector<double> jacobian_singular_values(const MatrixFunction& f, const ComplexDense& x,
                                             const JacobianOptions& opt) {
    RealMatrix g = gram_minus_identity(finite_difference_jacobian(f, x, opt).jacobian);
    for (std::size_t i = 0; i < g.rows; ++i) g(i, i) += 1.0;
    std::vector<double> ev = symmetric_eigenvalues(std::move(g));
    for (double& v : ev) v = std::sqrt(std::max(v, 0.0));
    return ev;
}

std::vector<double> symmetric_eigenvalues(RealMatrix m, double tol, int max_sweeps) {
    if (m.rows != m.cols) throw ShapeError("symmetric_eigenvalues: matrix must be square");
    const std::size_t n = m.rows;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                total += m(i, j) * m(i, j);
                if (i != j) off += m(i, j) * m(i, j);
            }
        }
        if (off <= tol * tol * std::max(total, 1e-300)) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = m(p, q);
                if (apq == 0.0) continue;
                const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double mkp = m(k, p);
                    const double mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double mpk = m(p, k);
                    const double mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = m(i, i);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

double symmetric_operator_norm(const RealMatrix& m, int iterations, std::uint64_t seed) {
    if (m.rows != m.cols) throw ShapeError("symmetric_operator_norm: matrix must be square");
    const std::size_t n = m.rows;
    if (n == 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    std::vector<double> v(n);
    for (double& x : v) x = unif(rng);
    std::vector<double> w(n);
    double estimate = 0.0;
    for (int it = 0; it < iterations; ++it) {
        double vn = 0.0;
        for (double x : v) vn += x * x;
        vn = std::sqrt(vn);
        if (vn == 0.0) return 0.0;
        for (double& x : v) x /= vn;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += m(i, j) * v[j];
            w[i] = s;
        }
        double wn = 0.0;
        for (double x : w) wn += x * x;
        estimate = std::sqrt(wn);
        v.swap(w);
    }
    return estimate;
}

Robustness robustness_radius(const std::vector<double>& logits, double lipschitz_l) {
    if (lipschitz_l <= 0.0) throw InputError("robustness_radius: Lipschitz constant must be positive");
    if (logits.size() < 2) throw InputError("robustness_radius: need at least two classes");
    std::vector<double> sorted = logits;
    std::partial_sort(sorted.begin(), sorted.begin() + 2, sorted.end(), std::greater<>());
    Robustness r;
    r.margin = std::max(0.0, sorted[0] - sorted[1]);
    r.radius = r.margin / (std::numbers::sqrt2 * lipschitz_l);
    return r;
}

PropagationTrace propagation_trace(const SparseReal& a, const ComplexDense& x0, std::size_t steps,
                                   PropagationMode mode, double scalar, int order) {
    if (frobenius_norm(x0) == 0.0) throw InputError("propagation_trace: x0 must be nonzero");
    PropagationTrace tr;
    auto record = [&](const ComplexDense& x) {
        tr.states.push_back(x);
        tr.dirichlet.push_back(dirichlet_energy(x, a));
        tr.rayleigh.push_back(rayleigh_quotient(x, a));
        tr.norms.push_back(frobenius_norm(x));
    };
    record(x0);
    ComplexDense x = x0;
    const cplx it{0.0, scalar};
    for (std::size_t s = 0; s < steps; ++s) {
        if (mode == PropagationMode::Standard) {
            x = scale(add(x, spmm(a, x)), scalar);
        } else {
            x = taylor_series([&](const ComplexDense& z) { return scale(spmm(a, z), it); }, x, order);
        }
        record(x);
    }
    return tr;
}

double standard_propagation_constant(const SparseReal& a) { return 1.0 / (1.0 + operator_norm_estimate(a)); }

double cosine_to_dominant(const ComplexDense& x, const std::vector<double>& degrees) {
    if (x.cols != 1 || x.rows != degrees.size()) throw ShapeError("cosine_to_dominant: x must be an n x 1 column");
    cplx dot{0.0, 0.0};
    double vn = 0.0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double v = std::sqrt(degrees[i]);
        dot += v * x(i, 0);
        vn += v * v;
    }
    const double xn = frobenius_norm(x);
    if (vn == 0.0 || xn == 0.0) throw InputError("cosine_to_dominant: zero vector");
    return std::abs(dot) / (std::sqrt(vn) * xn);
}

}  // namespace uconv
