#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uconv/expmap.hpp"
#include "uconv/graphs.hpp"
#include "uconv/numerics.hpp"

namespace uconv {

/// Finite group given by its Cayley table.
struct FiniteGroup {
    std::string name;
    std::size_t order = 0;
    std::vector<std::size_t> mult;  // mult[a * order + b] = a * b
    std::vector<std::size_t> inv;
    std::size_t identity = 0;
    std::vector<std::size_t> generators;

    [[nodiscard]] std::size_t mul(std::size_t a, std::size_t b) const { return mult[a * order + b]; }
    [[nodiscard]] std::size_t inverse(std::size_t a) const { return inv[a]; }
};

using Permutation = std::vector<std::size_t>;
using GroupFilter = std::vector<cplx>;
using GroupSignal = std::vector<cplx>;

struct Irrep {
    std::size_t dim = 0;
    std::vector<ComplexDense> matrices;  // one per group element
};

using IrrepSet = std::vector<Irrep>;
using FourierBlocks = std::vector<ComplexDense>;

/// D_n with element index flip * n + rotation, i.e. index k + f n is r^k s^f.
/// Generators are {r, s}.
FiniteGroup dihedral_group(std::size_t n);
FiniteGroup cyclic_group(std::size_t n);

std::size_t dihedral_element(std::size_t n, std::size_t rotation, bool flip);

/// Checks the group axioms exhaustively (closure, associativity on all
/// triples, identity, inverses) and that the generators reach every element.
bool validate_group(const FiniteGroup& g);

/// h -> h g, so R_g e_h = e_{hg}.
Permutation regular_right_action(const FiniteGroup& g, std::size_t elem);
/// h -> g^{-1} h, so T_g e_h = e_{g^{-1} h}.
Permutation regular_left_action(const FiniteGroup& g, std::size_t elem);

/// (m * x)(u) = sum_v m(u^{-1} v) x(v). Commutes with left translation and
/// equals [sum_g m(g) R_g^T] x.
GroupSignal group_convolve(const FiniteGroup& g, const GroupFilter& m, const GroupSignal& x);

/// Dense matrix of x -> group_convolve(g, m, x).
ComplexDense convolution_matrix(const FiniteGroup& g, const GroupFilter& m);

/// m'(g) = (m(g) + conj(m(g^{-1}))) / 2, which makes the convolution
/// operator Hermitian; multiplying by i then makes it skew-Hermitian.
GroupFilter lie_constrain_filter(const FiniteGroup& g, const GroupFilter& m);

/// exp(i * conv_{m'}) x with m' the constrained filter, truncated at `order`.
GroupSignal unitary_group_conv(const FiniteGroup& g, const GroupFilter& m, const GroupSignal& x,
                               int order = kDefaultTaylorOrder);

IrrepSet cyclic_irreps(std::size_t n);
IrrepSet dihedral_irreps(std::size_t n);

/// Homomorphism, unitarity (to `tol`) and sum of squared dimensions == |G|.
bool validate_irreps(const FiniteGroup& g, const IrrepSet& irreps, double tol = 1e-10);

/// hat f(rho_i) = sum_u f(u) rho_i(u), unnormalized.
FourierBlocks group_fourier_transform(const FiniteGroup& g, const IrrepSet& irreps, const GroupSignal& x);

/// f(u) = (1/|G|) sum_i d_i Tr(rho_i(u)^dagger hat f(rho_i)).
GroupSignal inverse_group_fourier_transform(const FiniteGroup& g, const IrrepSet& irreps, const FourierBlocks& blocks);

/// sqrt((1/|G|) sum_i d_i ||block_i||_F^2); equals ||x|| for blocks of x.
double fourier_norm(const FiniteGroup& g, const IrrepSet& irreps, const FourierBlocks& blocks);

/// Transform, multiply every block on the right by its unitary, transform
/// back. Right multiplication is the Fourier picture of group_convolve, so the
/// result commutes with left translation. Blocks must be unitary to 1e-8.
GroupSignal fourier_unitary_conv(const FiniteGroup& g, const IrrepSet& irreps, const FourierBlocks& unitaries,
                                 const GroupSignal& x);

/// Fewest left multiplications by generators (and their inverses) taking
/// `from` to `to`. For D_n the move set is {s, r, r^{-1}}.
std::size_t group_distance(const FiniteGroup& g, std::size_t from, std::size_t to);

/// All-pairs distance table, row = from.
std::vector<std::size_t> group_distance_table(const FiniteGroup& g);

struct GroupSample {
    std::size_t g = 0;
    std::size_t g_prime = 0;
    ComplexDense features;  // |G| x 1, e_g + e_{g'}
    double target = 0.0;
};

struct GroupDataset {
    FiniteGroup group;
    std::vector<GroupSample> samples;
    DatasetSplit split;
    std::uint64_t seed = 0;
};

GroupDataset dihedral_distance_dataset(std::size_t n, std::size_t n_samples, std::uint64_t seed);

}  // namespace uconv
