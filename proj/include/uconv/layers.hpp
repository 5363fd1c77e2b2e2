#pragma once

#include <cstdint>
#include <variant>

#include "uconv/expmap.hpp"
#include "uconv/numerics.hpp"

namespace uconv {

/// Feature map U = exp(skew(generator)); unitary by construction.
struct UnitaryMap {
    ComplexDense generator;
};

/// Feature map used as-is.
struct UnconstrainedMap {
    ComplexDense matrix;
};

using FeatureMap = std::variant<UnitaryMap, UnconstrainedMap>;

struct UniConvParams {
    double t = 1.0;
    FeatureMap feature_map;
};

struct LieUniConvParams {
    ComplexDense raw;  // W = skew_hermitian_project(raw) in the forward pass
};

struct VanillaConvParams {
    ComplexDense w0;
    ComplexDense w1;
};

ComplexDense materialize(const FeatureMap& map);

/// exp(i t A) X U, with the exponential truncated at `order`.
ComplexDense uniconv_forward(const ComplexDense& x, const SparseReal& a, const UniConvParams& p,
                             int order = kDefaultTaylorOrder);

/// exp(X -> A X W) applied to X with W the skew-Hermitian part of p.raw.
ComplexDense lie_uniconv_forward(const ComplexDense& x, const SparseReal& a, const LieUniConvParams& p,
                                 int order = kDefaultTaylorOrder);

/// X W0 + A X W1.
ComplexDense vanilla_conv_forward(const ComplexDense& x, const SparseReal& a, const VanillaConvParams& p);

/// Parameters of the inverse layer: t -> -t and U -> U^dagger (UniConv),
/// W -> -W (Lie UniConv). Unconstrained feature maps have no such inverse.
UniConvParams inverse_params(const UniConvParams& p);
LieUniConvParams inverse_params(const LieUniConvParams& p);

/// Norm bound of the exponentiated action, given a bound on ||A||.
double uniconv_action_norm(const UniConvParams& p, double a_norm);
double lie_uniconv_action_norm(const LieUniConvParams& p, double a_norm);

/// Pairs channel j with channel j + d/2 and writes (max, min); real and
/// imaginary parts are sorted independently.
ComplexDense groupsort(const ComplexDense& x);

/// Real block-diagonal skew matrix with 2x2 blocks [[0, s], [-s, 0]],
/// s ~ Unif(-pi, pi). The trailing diagonal entry is 0 when d is odd.
ComplexDense init_skew_blocks(std::size_t d, std::uint64_t seed);

ComplexDense zero_pad_features(const ComplexDense& x, std::size_t d_out);

}  // namespace uconv
