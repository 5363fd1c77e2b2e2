#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "uconv/numerics.hpp"

namespace uconv {

using Edge = std::pair<std::size_t, std::size_t>;

struct Graph {
    std::size_t n = 0;
    std::vector<Edge> edges;  // undirected, each stored once with first < second
    SparseReal adjacency;
    std::vector<double> degrees;

    static Graph from_edges(std::size_t n, const std::vector<Edge>& edges);
};

struct GraphSample {
    Graph graph;
    ComplexDense features;
    double target = 0.0;
};

struct DatasetSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct LabeledGraphDataset {
    std::vector<GraphSample> samples;
    DatasetSplit split;
    std::uint64_t seed = 0;
};

/// Symmetric 0/1 adjacency; duplicate edges collapse, self loops are kept
/// only if listed explicitly.
SparseReal build_adjacency(const std::vector<Edge>& edges, std::size_t n);

/// D^{-1/2} A D^{-1/2}. Isolated nodes get D^{-1/2} = 0.
SparseReal normalize_adjacency(const SparseReal& a);

Graph ring_graph(std::size_t n);
Graph complete_graph(std::size_t n);
Graph path_graph(std::size_t n);
/// Ring with chords (i, i+2): degree 4, every consecutive triple is a triangle.
Graph squared_ring_graph(std::size_t n);
Graph disjoint_union(const Graph& a, const Graph& b);
/// G(n, p) with a spanning random tree added so the result is connected.
Graph random_connected_graph(std::size_t n, double p, std::uint64_t seed);

/// Skew-Hermitian H = i A_sym + A_nonsym for a directed adjacency whose
/// transposed entry pairs are either equal or have one side zero.
ComplexDense split_directed(const SparseReal& a);

/// Ring task: features zero except two distinct marked nodes, target is their
/// ring distance. Splits are 80/10/10 after a seeded shuffle.
LabeledGraphDataset ring_distance_dataset(std::size_t n_nodes, std::size_t n_samples, std::uint64_t seed);

std::size_t ring_distance(std::size_t n, std::size_t i, std::size_t j);

/// Seeded train/val/test partition of [0, n).
DatasetSplit make_split(std::size_t n, std::uint64_t seed, double train_frac = 0.8, double val_frac = 0.1);

/// Edge-list text: one "u v" pair per line, 0-indexed, '#' starts a comment.
/// The node count is max index + 1 unless `n_hint` is larger.
Graph read_edge_list(std::istream& in, std::size_t n_hint = 0);
Graph read_edge_list_file(const std::string& path, std::size_t n_hint = 0);

/// splitmix64 finaliser, used to derive per-sample seeds.
std::uint64_t mix_seed(std::uint64_t x);

}  // namespace uconv
