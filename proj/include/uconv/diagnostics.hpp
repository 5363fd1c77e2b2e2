#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "uconv/layers.hpp"
#include "uconv/numerics.hpp"

namespace uconv {

/// Re Tr(X^dagger (I - A) X), without forming I - A.
double dirichlet_energy(const ComplexDense& x, const SparseReal& a);

/// Dirichlet energy over ||X||_F^2. Throws InputError for X = 0.
double rayleigh_quotient(const ComplexDense& x, const SparseReal& a);

using LayerParams = std::variant<UniConvParams, LieUniConvParams, VanillaConvParams>;

ComplexDense apply_layer(const LayerParams& layer, const ComplexDense& x, const SparseReal& a,
                         int order = kDefaultTaylorOrder);

/// |R(f(X)) - R(X)|.
double rayleigh_invariance_check(const LayerParams& layer, const ComplexDense& x, const SparseReal& a,
                                 int order = kDefaultTaylorOrder);

/// 1 - Tr(A^3) / Tr(A^2). Throws InputError when Tr(A^2) = 0.
double expected_rayleigh_vanilla(const SparseReal& a);

struct MonteCarloResult {
    double mean_before = 0.0;
    double mean_after = 0.0;
    std::size_t trials = 0;
};

/// Real X with rows uniform on S^{d-1}, one step X -> A X W with W Haar
/// orthogonal. Trial k uses seed mix(seed ^ k); means are pairwise sums in
/// trial order, so the result does not depend on `threads`.
MonteCarloResult oversmoothing_monte_carlo(const SparseReal& a, std::size_t d, std::size_t n_trials,
                                           std::uint64_t seed, unsigned threads = 1);

/// Haar-distributed real orthogonal d x d matrix (QR of a Gaussian, R diagonal made positive).
ComplexDense random_orthogonal(std::size_t d, std::uint64_t seed);

struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

using MatrixFunction = std::function<ComplexDense(const ComplexDense&)>;

struct JacobianOptions {
    double eps = 1e-5;
    /// Returns true when the function is not differentiable at the point
    /// (e.g. tied GroupSort pairs); the point is then perturbed and retried.
    std::function<bool(const ComplexDense&)> degenerate;
    std::uint64_t seed = 0;
    int max_perturbations = 16;
    double perturbation = 1e-3;
};

struct JacobianResult {
    RealMatrix jacobian;  // outputs x inputs over (Re, Im) coordinates, entry-major
    ComplexDense point;   // where it was evaluated
    bool perturbed = false;
};

/// Central differences over every real coordinate of X.
JacobianResult finite_difference_jacobian(const MatrixFunction& f, const ComplexDense& x,
                                          const JacobianOptions& opt = {});

/// ||J^T J - I|| by power iteration.
double jacobian_isometry_gap(const MatrixFunction& f, const ComplexDense& x, const JacobianOptions& opt = {});

/// All singular values of the finite-difference Jacobian, descending.
std::vector<double> jacobian_singular_values(const MatrixFunction& f, const ComplexDense& x,
                                             const JacobianOptions& opt = {});

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
std::vector<double> symmetric_eigenvalues(RealMatrix m, double tol = 1e-14, int max_sweeps = 100);

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
double symmetric_operator_norm(const RealMatrix& m, int iterations = 500, std::uint64_t seed = 0x5eed);

/// Smallest |a - b| over the GroupSort pairs of X, real and imaginary parts.
double min_groupsort_gap(const ComplexDense& x);

struct Robustness {
    double margin = 0.0;
    double radius = 0.0;
};

/// margin = max(0, top - runner-up), radius = margin / (sqrt(2) L).
Robustness robustness_radius(const std::vector<double>& logits, double lipschitz_l);

enum class PropagationMode { Standard, Unitary };

struct PropagationTrace {
    std::vector<ComplexDense> states;  // steps + 1 entries, states[0] = x0
    std::vector<double> dirichlet;
    std::vector<double> rayleigh;
    std::vector<double> norms;
};

/// Standard: x <- c (x + A x). Unitary: x <- exp(i t A) x truncated at `order`.
/// `scalar` is c or t.
PropagationTrace propagation_trace(const SparseReal& a, const ComplexDense& x0, std::size_t steps,
                                   PropagationMode mode, double scalar, int order = kDefaultTaylorOrder);

/// 1 / (1 + ||A||) with the norm from operator_norm_estimate.
double standard_propagation_constant(const SparseReal& a);

/// |<v, x>| / (||v|| ||x||) with v_i = sqrt(degree_i), the top eigenvector of
/// the normalized adjacency of a connected graph. x is a single column.
double cosine_to_dominant(const ComplexDense& x, const std::vector<double>& degrees);

}  // namespace uconv
