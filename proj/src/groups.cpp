#include "uconv/groups.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <random>

namespace uconv {

std::size_t dihedral_element(std::size_t n, std::size_t rotation, bool flip) {
    return (flip ? n : 0) + rotation % n;
}

FiniteGroup dihedral_group(std::size_t n) {
    if (n < 2) throw InputError("dihedral_group: need n >= 2, got " + std::to_string(n));
    FiniteGroup g;
    g.name = "D" + std::to_string(n);
    g.order = 2 * n;
    g.mult.resize(g.order * g.order);
    g.inv.resize(g.order);
    for (std::size_t a = 0; a < g.order; ++a) {
        const std::size_t ka = a % n;
        const bool fa = a >= n;
        for (std::size_t b = 0; b < g.order; ++b) {
            const std::size_t kb = b % n;
            const bool fb = b >= n;
            // r^ka s^fa r^kb s^fb = r^(ka + (-1)^fa kb) s^(fa + fb)
            const std::size_t k = fa ? (ka + n - kb) % n : (ka + kb) % n;
            g.mult[a * g.order + b] = dihedral_element(n, k, fa != fb);
        }
    }
    for (std::size_t a = 0; a < g.order; ++a) {
        // rotations invert to r^{-k}; reflections are involutions
        g.inv[a] = a < n ? (n - a) % n : a;
    }
    g.identity = 0;
    g.generators = {dihedral_element(n, 1, false), dihedral_element(n, 0, true)};
    return g;
}

FiniteGroup cyclic_group(std::size_t n) {
    if (n < 1) throw InputError("cyclic_group: need n >= 1");
    FiniteGroup g;
    g.name = "Z" + std::to_string(n);
    g.order = n;
    g.mult.resize(n * n);
    g.inv.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) g.mult[a * n + b] = (a + b) % n;
        g.inv[a] = (n - a) % n;
    }
    g.identity = 0;
    if (n > 1) g.generators = {1};
    return g;
}

bool validate_group(const FiniteGroup& g) {
    const std::size_t n = g.order;
    if (g.mult.size() != n * n || g.inv.size() != n || g.identity >= n) return false;
    for (std::size_t a = 0; a < n; ++a) {
        if (g.mul(g.identity, a) != a || g.mul(a, g.identity) != a) return false;
        if (g.mul(a, g.inverse(a)) != g.identity || g.mul(g.inverse(a), a) != g.identity) return false;
        for (std::size_t b = 0; b < n; ++b) {
            if (g.mul(a, b) >= n) return false;
            for (std::size_t c = 0; c < n; ++c) {
                if (g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c))) return false;
            }
        }
    }
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{g.identity};
    seen[g.identity] = true;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const std::size_t x = queue.front();
        queue.pop_front();
        for (std::size_t gen : g.generators) {
            const std::size_t y = g.mul(gen, x);
            if (!seen[y]) {
                seen[y] = true;
                ++reached;
                queue.push_back(y);
            }
        }
    }
    return reached == n;
}

Permutation regular_right_action(const FiniteGroup& g, std::size_t elem) {
    Permutation p(g.order);
    for (std::size_t h = 0; h < g.order; ++h) p[h] = g.mul(h, elem);
    return p;
}

Permutation regular_left_action(const FiniteGroup& g, std::size_t elem) {
    Permutation p(g.order);
    const std::size_t e_inv = g.inverse(elem);
    for (std::size_t h = 0; h < g.order; ++h) p[h] = g.mul(e_inv, h);
    return p;
}

GroupSignal group_convolve(const FiniteGroup& g, const GroupFilter& m, const GroupSignal& x) {
    if (m.size() != g.order || x.size() != g.order) {
        throw ShapeError("group_convolve: filter and signal must have length |G| = " + std::to_string(g.order));
    }
    GroupSignal y(g.order);
    for (std::size_t u = 0; u < g.order; ++u) {
        const std::size_t u_inv = g.inverse(u);
        cplx acc{};
        for (std::size_t v = 0; v < g.order; ++v) acc += m[g.mul(u_inv, v)] * x[v];
        y[u] = acc;
    }
    return y;
}

ComplexDense convolution_matrix(const FiniteGroup& g, const GroupFilter& m) {
    if (m.size() != g.order) throw ShapeError("convolution_matrix: filter length must be |G|");
    ComplexDense c(g.order, g.order);
    for (std::size_t u = 0; u < g.order; ++u) {
        for (std::size_t v = 0; v < g.order; ++v) c.set(u, v, m[g.mul(g.inverse(u), v)]);
    }
    return c;
}

GroupFilter lie_constrain_filter(const FiniteGroup& g, const GroupFilter& m) {
    if (m.size() != g.order) throw ShapeError("lie_constrain_filter: filter length must be |G|");
    GroupFilter out(g.order);
    for (std::size_t a = 0; a < g.order; ++a) out[a] = 0.5 * (m[a] + std::conj(m[g.inverse(a)]));
    return out;
}

namespace {

ComplexDense to_column(const GroupSignal& x) {
    ComplexDense c(x.size(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) c.set(i, 0, x[i]);
    return c;
}

GroupSignal from_column(const ComplexDense& c) {
    GroupSignal x(c.rows);
    for (std::size_t i = 0; i < c.rows; ++i) x[i] = c(i, 0);
    return x;
}

}  // namespace

GroupSignal unitary_group_conv(const FiniteGroup& g, const GroupFilter& m, const GroupSignal& x, int order) {
    if (x.size() != g.order) throw ShapeError("unitary_group_conv: signal length must be |G|");
    const GroupFilter constrained = lie_constrain_filter(g, m);
    auto action = [&](const ComplexDense& z) {
        GroupSignal y = group_convolve(g, constrained, from_column(z));
        for (auto& v : y) v *= cplx{0.0, 1.0};
        return to_column(y);
    };
    return from_column(taylor_series(action, to_column(x), order));
}

IrrepSet cyclic_irreps(std::size_t n) {
    if (n < 1) throw InputError("cyclic_irreps: need n >= 1");
    IrrepSet out;
    for (std::size_t j = 0; j < n; ++j) {
        Irrep rho;
        rho.dim = 1;
        for (std::size_t k = 0; k < n; ++k) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
            rho.matrices.push_back(ComplexDense::from_rows({{std::polar(1.0, angle)}}));
        }
        out.push_back(std::move(rho));
    }
    return out;
}

IrrepSet dihedral_irreps(std::size_t n) {
    if (n < 2) throw InputError("dihedral_irreps: need n >= 2");
    IrrepSet out;
    auto one_dim = [n](int rot_sign, int flip_sign) {
        Irrep rho;
        rho.dim = 1;
        for (std::size_t e = 0; e < 2 * n; ++e) {
            const std::size_t k = e % n;
            const bool f = e >= n;
            double v = (rot_sign < 0 && k % 2 == 1) ? -1.0 : 1.0;
            if (f && flip_sign < 0) v = -v;
            rho.matrices.push_back(ComplexDense::from_rows({{cplx{v, 0.0}}}));
        }
        return rho;
    };
    out.push_back(one_dim(+1, +1));
    out.push_back(one_dim(+1, -1));
    if (n % 2 == 0) {
        out.push_back(one_dim(-1, +1));
        out.push_back(one_dim(-1, -1));
    }
    for (std::size_t j = 1; 2 * j < n; ++j) {
        Irrep rho;
        rho.dim = 2;
        for (std::size_t e = 0; e < 2 * n; ++e) {
            const std::size_t k = e % n;
            const double angle = 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
            const cplx w = std::polar(1.0, angle);
            if (e < n) {
                rho.matrices.push_back(ComplexDense::from_rows({{w, 0.0}, {0.0, std::conj(w)}}));
            } else {
                // r^k s = diag(w, conj w) * [[0, 1], [1, 0]]
                rho.matrices.push_back(ComplexDense::from_rows({{0.0, w}, {std::conj(w), 0.0}}));
            }
        }
        out.push_back(std::move(rho));
    }
    return out;
}

bool validate_irreps(const FiniteGroup& g, const IrrepSet& irreps, double tol) {
    std::size_t dim_sq = 0;
    for (const auto& rho : irreps) {
        dim_sq += rho.dim * rho.dim;
        if (rho.matrices.size() != g.order) return false;
        const auto eye = ComplexDense::identity(rho.dim);
        for (std::size_t a = 0; a < g.order; ++a) {
            const auto& ra = rho.matrices[a];
            if (ra.rows != rho.dim || ra.cols != rho.dim) return false;
            if (frobenius_norm(sub(matmul(conj_transpose(ra), ra), eye)) > tol) return false;
            for (std::size_t b = 0; b < g.order; ++b) {
                if (max_abs_diff(matmul(ra, rho.matrices[b]), rho.matrices[g.mul(a, b)]) > tol) return false;
            }
        }
    }
    return dim_sq == g.order;
}

FourierBlocks group_fourier_transform(const FiniteGroup& g, const IrrepSet& irreps, const GroupSignal& x) {
    if (x.size() != g.order) throw ShapeError("group_fourier_transform: signal length must be |G|");
    FourierBlocks blocks;
    blocks.reserve(irreps.size());
    for (const auto& rho : irreps) {
        ComplexDense acc(rho.dim, rho.dim);
        for (std::size_t u = 0; u < g.order; ++u) {
            if (x[u] == cplx{}) continue;
            acc = add(acc, scale(rho.matrices[u], x[u]));
        }
        blocks.push_back(std::move(acc));
    }
    return blocks;
}

GroupSignal inverse_group_fourier_transform(const FiniteGroup& g, const IrrepSet& irreps, const FourierBlocks& blocks) {
    if (blocks.size() != irreps.size()) throw ShapeError("inverse_group_fourier_transform: block count mismatch");
    GroupSignal x(g.order);
    const double inv_order = 1.0 / static_cast<double>(g.order);
    for (std::size_t u = 0; u < g.order; ++u) {
        cplx acc{};
        for (std::size_t i = 0; i < irreps.size(); ++i) {
            // Tr(rho(u)^dagger B) = sum_{ab} conj(rho(u)_{ab}) B_{ab}
            acc += static_cast<double>(irreps[i].dim) * inner(irreps[i].matrices[u], blocks[i]);
        }
        x[u] = acc * inv_order;
    }
    return x;
}

double fourier_norm(const FiniteGroup& g, const IrrepSet& irreps, const FourierBlocks& blocks) {
    double s = 0.0;
    for (std::size_t i = 0; i < irreps.size(); ++i) {
        const double f = frobenius_norm(blocks[i]);
        s += static_cast<double>(irreps[i].dim) * f * f;
    }
    return std::sqrt(s / static_cast<double>(g.order));
}

GroupSignal fourier_unitary_conv(const FiniteGroup& g, const IrrepSet& irreps, const FourierBlocks& unitaries,
                                 const GroupSignal& x) {
    if (unitaries.size() != irreps.size()) throw ShapeError("fourier_unitary_conv: one unitary per irrep required");
    for (std::size_t i = 0; i < irreps.size(); ++i) {
        const auto& u = unitaries[i];
        if (u.rows != irreps[i].dim || u.cols != irreps[i].dim) {
            throw ShapeError("fourier_unitary_conv: block " + std::to_string(i) + " has the wrong dimension");
        }
        const double err = frobenius_norm(sub(matmul(conj_transpose(u), u), ComplexDense::identity(u.rows)));
        if (err > 1e-8) {
            throw InputError("fourier_unitary_conv: block " + std::to_string(i) + " is not unitary (||U^dagger U - I|| = " +
                             std::to_string(err) + ")");
        }
    }
    FourierBlocks y = group_fourier_transform(g, irreps, x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = matmul(y[i], unitaries[i]);
    return inverse_group_fourier_transform(g, irreps, y);
}

namespace {

std::vector<std::size_t> distance_moves(const FiniteGroup& g) {
    std::vector<std::size_t> moves;
    for (std::size_t gen : g.generators) {
        for (std::size_t m : {gen, g.inverse(gen)}) {
            if (std::find(moves.begin(), moves.end(), m) == moves.end()) moves.push_back(m);
        }
    }
    return moves;
}

std::vector<std::size_t> bfs_from(const FiniteGroup& g, std::size_t from, const std::vector<std::size_t>& moves) {
    constexpr auto unreached = static_cast<std::size_t>(-1);
    std::vector<std::size_t> dist(g.order, unreached);
    std::deque<std::size_t> queue{from};
    dist[from] = 0;
    while (!queue.empty()) {
        const std::size_t x = queue.front();
        queue.pop_front();
        for (std::size_t a : moves) {
            const std::size_t y = g.mul(a, x);
            if (dist[y] == unreached) {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    return dist;
}

}  // namespace

std::size_t group_distance(const FiniteGroup& g, std::size_t from, std::size_t to) {
    if (from >= g.order || to >= g.order) throw InputError("group_distance: element out of range");
    return bfs_from(g, from, distance_moves(g))[to];
}

std::vector<std::size_t> group_distance_table(const FiniteGroup& g) {
    const auto moves = distance_moves(g);
    std::vector<std::size_t> table;
    table.reserve(g.order * g.order);
    for (std::size_t a = 0; a < g.order; ++a) {
        const auto row = bfs_from(g, a, moves);
        table.insert(table.end(), row.begin(), row.end());
    }
    return table;
}

GroupDataset dihedral_distance_dataset(std::size_t n, std::size_t n_samples, std::uint64_t seed) {
    GroupDataset ds;
    ds.group = dihedral_group(n);
    ds.seed = seed;
    const std::size_t order = ds.group.order;
    const auto table = group_distance_table(ds.group);
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::mt19937_64 rng(mix_seed(seed ^ s));
        std::uniform_int_distribution<std::size_t> first(0, order - 1);
        std::uniform_int_distribution<std::size_t> offset(1, order - 1);
        GroupSample sample;
        sample.g = first(rng);
        sample.g_prime = (sample.g + offset(rng)) % order;
        sample.features = ComplexDense(order, 1);
        sample.features.re[sample.g] = 1.0;
        sample.features.re[sample.g_prime] = 1.0;
        sample.target = static_cast<double>(table[sample.g * order + sample.g_prime]);
        ds.samples.push_back(std::move(sample));
    }
    ds.split = make_split(n_samples, seed);
    return ds;
}

}  // namespace uconv
