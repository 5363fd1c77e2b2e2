#include "uconv/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace uconv {

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SparseReal build_adjacency(const std::vector<Edge>& edges, std::size_t n) {
    std::set<Edge> unique;
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) {
            throw InputError("build_adjacency: edge (" + std::to_string(u) + ", " + std::to_string(v) +
                             ") out of range for n=" + std::to_string(n));
        }
        unique.insert({u, v});
        unique.insert({v, u});
    }
    std::vector<SparseReal::Triplet> t;
    t.reserve(unique.size());
    for (const auto& [u, v] : unique) t.push_back({u, v, 1.0});
    auto a = SparseReal::from_triplets(n, n, std::move(t));
    a.symmetric = true;
    return a;
}

SparseReal normalize_adjacency(const SparseReal& a) {
    if (a.rows != a.cols) throw ShapeError("normalize_adjacency: matrix is not square");
    std::vector<double> deg(a.rows, 0.0);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) deg[r] += a.values[k];
    }
    // one rounding per entry: regular graphs get exact 1/deg
    SparseReal out = a;
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) {
            const double dd = deg[r] * deg[a.col_idx[k]];
            out.values[k] = dd > 0.0 ? a.values[k] / std::sqrt(dd) : 0.0;
        }
    }
    return out;
}

Graph Graph::from_edges(std::size_t n, const std::vector<Edge>& edge_list) {
    Graph g;
    g.n = n;
    std::set<Edge> unique;
    for (const auto& [u, v] : edge_list) unique.insert({std::min(u, v), std::max(u, v)});
    g.edges.assign(unique.begin(), unique.end());
    g.adjacency = build_adjacency(g.edges, n);
    g.degrees.assign(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t k = g.adjacency.row_ptr[r]; k < g.adjacency.row_ptr[r + 1]; ++k) {
            g.degrees[r] += g.adjacency.values[k];
        }
    }
    return g;
}

Graph ring_graph(std::size_t n) {
    if (n < 3) throw InputError("ring_graph: need n >= 3, got " + std::to_string(n));
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) e.push_back({i, (i + 1) % n});
    return Graph::from_edges(n, e);
}

Graph complete_graph(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) e.push_back({i, j});
    }
    return Graph::from_edges(n, e);
}

Graph path_graph(std::size_t n) {
    std::vector<Edge> e;
    for (std::size_t i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return Graph::from_edges(n, e);
}

Graph squared_ring_graph(std::size_t n) {
    if (n < 5) throw InputError("squared_ring_graph: need n >= 5");
    std::vector<Edge> e;
    for (std::size_t i = 0; i < n; ++i) {
        e.push_back({i, (i + 1) % n});
        e.push_back({i, (i + 2) % n});
    }
    return Graph::from_edges(n, e);
}

Graph disjoint_union(const Graph& a, const Graph& b) {
    std::vector<Edge> e = a.edges;
    for (const auto& [u, v] : b.edges) e.push_back({u + a.n, v + a.n});
    return Graph::from_edges(a.n + b.n, e);
}

Graph random_connected_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> e;
    for (std::size_t v = 1; v < n; ++v) {
        std::uniform_int_distribution<std::size_t> parent(0, v - 1);
        e.push_back({parent(rng), v});
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (unif(rng) < p) e.push_back({i, j});
        }
    }
    return Graph::from_edges(n, e);
}

ComplexDense split_directed(const SparseReal& a) {
    if (a.rows != a.cols) throw ShapeError("split_directed: matrix is not square");
    const std::size_t n = a.rows;
    ComplexDense h(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
            const std::size_t j = a.col_idx[k];
            const double aij = a.values[k];
            const double aji = a.at(j, i);
            if (aij == aji) {
                h.im[i * n + j] = aij;  // i * A_sym
            } else if (aji == 0.0) {
                h.re[i * n + j] = aij;
                h.re[j * n + i] = -aij;
            } else {
                throw InputError("split_directed: entries (" + std::to_string(i) + ", " + std::to_string(j) +
                                 ") and its transpose are unequal and both nonzero");
            }
        }
    }
    return h;
}

std::size_t ring_distance(std::size_t n, std::size_t i, std::size_t j) {
    const std::size_t d = i > j ? i - j : j - i;
    return std::min(d, n - d);
}

DatasetSplit make_split(std::size_t n, std::uint64_t seed, double train_frac, double val_frac) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(mix_seed(seed ^ 0x5b1173ULL));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(val_frac * static_cast<double>(n))));
    DatasetSplit s;
    s.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                 idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    s.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
    return s;
}

LabeledGraphDataset ring_distance_dataset(std::size_t n_nodes, std::size_t n_samples, std::uint64_t seed) {
    if (n_nodes < 3) throw InputError("ring_distance_dataset: need n_nodes >= 3");
    const Graph ring = ring_graph(n_nodes);
    LabeledGraphDataset ds;
    ds.seed = seed;
    ds.samples.reserve(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
        std::mt19937_64 rng(mix_seed(seed ^ s));
        std::uniform_int_distribution<std::size_t> first(0, n_nodes - 1);
        std::uniform_int_distribution<std::size_t> offset(1, n_nodes - 1);
        const std::size_t i = first(rng);
        const std::size_t j = (i + offset(rng)) % n_nodes;
        GraphSample sample;
        sample.graph = ring;
        sample.features = ComplexDense(n_nodes, 1);
        sample.features.re[i] = 1.0;
        sample.features.re[j] = 1.0;
        sample.target = static_cast<double>(ring_distance(n_nodes, i, j));
        ds.samples.push_back(std::move(sample));
    }
    ds.split = make_split(n_samples, seed);
    return ds;
}

Graph read_edge_list(std::istream& in, std::size_t n_hint) {
    std::vector<Edge> edges;
    std::size_t n = n_hint;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        long long u = 0;
        long long v = 0;
        if (!(ls >> u)) continue;
        std::string rest;
        if (!(ls >> v) || (ls >> rest) || u < 0 || v < 0) {
            throw InputError("edge list line " + std::to_string(line_no) + ": expected two non-negative indices");
        }
        edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
        n = std::max(n, static_cast<std::size_t>(std::max(u, v)) + 1);
    }
    return Graph::from_edges(n, edges);
}

Graph read_edge_list_file(const std::string& path, std::size_t n_hint) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open edge list '" + path + "'");
    return read_edge_list(in, n_hint);
}

}  // namespace uconv
