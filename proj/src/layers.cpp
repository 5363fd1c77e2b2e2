#include "uconv/layers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <type_traits>

namespace uconv {

namespace {

void require_symmetric(const SparseReal& a, const char* who) {
    if (!a.is_structurally_symmetric(1e-12)) {
        throw InputError(std::string(who) + ": adjacency must be symmetric for the exponential to be unitary");
    }
}

}  // namespace

ComplexDense materialize(const FeatureMap& map) {
    return std::visit(
        [](const auto& m) -> ComplexDense {
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, UnitaryMap>) {
                return unitary_from_skew(m.generator);
            } else {
                return m.matrix;
            }
        },
        map);
}

ComplexDense uniconv_forward(const ComplexDense& x, const SparseReal& a, const UniConvParams& p, int order) {
    require_symmetric(a, "uniconv_forward");
    const cplx it{0.0, p.t};
    auto action = [&](const ComplexDense& z) { return scale(spmm(a, z), it); };
    return matmul(taylor_series(action, x, order), materialize(p.feature_map));
}

ComplexDense lie_uniconv_forward(const ComplexDense& x, const SparseReal& a, const LieUniConvParams& p, int order) {
    require_symmetric(a, "lie_uniconv_forward");
    const ComplexDense w = skew_hermitian_project(p.raw);
    auto action = [&](const ComplexDense& z) { return matmul(spmm(a, z), w); };
    return taylor_series(action, x, order);
}

ComplexDense vanilla_conv_forward(const ComplexDense& x, const SparseReal& a, const VanillaConvParams& p) {
    if (a.rows != x.rows || a.cols != x.rows) throw ShapeError("vanilla_conv_forward: adjacency/feature mismatch");
    return add(matmul(x, p.w0), matmul(spmm(a, x), p.w1));
}

UniConvParams inverse_params(const UniConvParams& p) {
    const auto* unitary = std::get_if<UnitaryMap>(&p.feature_map);
    if (unitary == nullptr) throw InputError("inverse_params: unconstrained feature map has no unitary inverse");
    return UniConvParams{-p.t, UnitaryMap{scale(unitary->generator, -1.0)}};
}

LieUniConvParams inverse_params(const LieUniConvParams& p) { return {scale(p.raw, -1.0)}; }

double uniconv_action_norm(const UniConvParams& p, double a_norm) { return std::abs(p.t) * a_norm; }

double lie_uniconv_action_norm(const LieUniConvParams& p, double a_norm) {
    return a_norm * frobenius_norm(skew_hermitian_project(p.raw));
}

ComplexDense groupsort(const ComplexDense& x) {
    if (x.cols % 2 != 0) throw ShapeError("groupsort: feature dimension must be even, got " + std::to_string(x.cols));
    const std::size_t half = x.cols / 2;
    ComplexDense out = x;
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t j = 0; j < half; ++j) {
            const std::size_t a = r * x.cols + j;
            const std::size_t b = a + half;
            out.re[a] = std::max(x.re[a], x.re[b]);
            out.re[b] = std::min(x.re[a], x.re[b]);
            out.im[a] = std::max(x.im[a], x.im[b]);
            out.im[b] = std::min(x.im[a], x.im[b]);
        }
    }
    return out;
}

ComplexDense init_skew_blocks(std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-std::numbers::pi, std::numbers::pi);
    ComplexDense w(d, d);
    for (std::size_t b = 0; b + 1 < d; b += 2) {
        const double s = unif(rng);
        w.re[b * d + b + 1] = s;
        w.re[(b + 1) * d + b] = -s;
    }
    return w;
}

ComplexDense zero_pad_features(const ComplexDense& x, std::size_t d_out) {
    if (d_out < x.cols) {
        throw ShapeError("zero_pad_features: target width " + std::to_string(d_out) + " < input width " +
                         std::to_string(x.cols));
    }
    ComplexDense out(x.rows, d_out);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) {
            out.re[r * d_out + c] = x.re[r * x.cols + c];
            out.im[r * d_out + c] = x.im[r * x.cols + c];
        }
    }
    return out;
}

}  // namespace uconv
