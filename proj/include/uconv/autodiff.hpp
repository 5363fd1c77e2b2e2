#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "uconv/numerics.hpp"

namespace uconv::ad {

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    [[nodiscard]] const ComplexDense& value() const;
    /// Accumulated gradient, zeros if nothing flowed into this node.
    [[nodiscard]] ComplexDense grad() const;
};

/// Append-only record of complex matrix operations. Gradients are stored as
/// dL/dRe + i dL/dIm, so a complex-linear map Y = A X pulls back as A^dagger G
/// and every parameter is effectively a pair of real coordinates.
class Tape {
public:
    using Backward = std::function<void(Tape&, const ComplexDense& grad_out)>;

    Var leaf(ComplexDense value);
    Var constant(ComplexDense value);
    Var record(ComplexDense value, const std::vector<Var>& parents, Backward backward);

    /// Seeds d(loss)/d(loss) = 1 on the real part of a 1x1 node and visits
    /// every earlier node once, in reverse insertion order.
    void backward(Var loss);

    [[nodiscard]] const ComplexDense& value(std::size_t id) const { return nodes_[id].value; }
    [[nodiscard]] ComplexDense grad(std::size_t id) const;
    [[nodiscard]] bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
    void accumulate(std::size_t id, const ComplexDense& delta);
    void accumulate(std::size_t id, ComplexDense&& delta);
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        ComplexDense value;
        ComplexDense grad;
        Backward backward;
        bool needs_grad = false;
    };
    std::vector<Node> nodes_;
};

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double s);
Var scale(Var a, cplx s);
/// c * s * a where s is a 1x1 node whose real part is used.
Var scale_by(Var a, Var s, cplx c);
Var matmul(Var a, Var b);
Var spmm(std::shared_ptr<const SparseReal> s, Var x);
Var conj_transpose(Var a);
/// sum_{k<=order} (i t A)^k / k! X for a symmetric real A and a 1x1 real t,
/// as one node. Its pullback is the same truncated series in -i t A, and
/// d/dt = i A S_{order-1} X with S the one-shorter partial sum.
Var expm_i_sym(std::shared_ptr<const SparseReal> a, Var t, Var x, int order);
/// (M - M^dagger) / 2
Var skew_hermitian_project(Var m);
Var groupsort(Var x);
/// Exact (erf) GELU on real and imaginary parts separately.
Var gelu(Var x);
/// Row-wise mean over consecutive row segments [offsets[k], offsets[k+1]).
Var segment_mean(Var x, const std::vector<std::size_t>& offsets);
/// [Re X | Im X] as a real matrix with twice the columns.
Var realify(Var x);
/// X + 1 b for a 1 x cols bias row.
Var add_row_bias(Var x, Var bias);
Var zero_pad(Var x, std::size_t d_out);
/// mean_i |Re pred_i - target_i| over a column of predictions.
Var mae_loss(Var pred, const std::vector<double>& targets);
/// ||X||_F^2 as a 1x1 node.
Var squared_norm(Var x);

struct Param {
    std::string name;
    ComplexDense value;
    bool real_only = false;  // imaginary part frozen at zero
};

using ParamSet = std::vector<Param>;
using Gradients = std::vector<ComplexDense>;

std::size_t real_coordinate_count(const ParamSet& params);

/// Central differences (f(p + eps) - f(p - eps)) / 2 eps on every real
/// coordinate. Gradients of real-only parameters have zero imaginary part.
Gradients finite_diff_grad(const std::function<double(const ParamSet&)>& f, const ParamSet& params,
                           double eps = 1e-5);

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    std::vector<ComplexDense> m;
    std::vector<ComplexDense> v;
    std::size_t step = 0;
};

AdamState adam_init(const ParamSet& params);

/// Bias-corrected Adam update applied independently to every real coordinate.
void adam_step(ParamSet& params, const Gradients& grads, AdamState& state, const AdamHyper& hyper);

}  // namespace uconv::ad
