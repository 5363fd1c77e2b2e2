#include "uconv/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace uconv::ad {

const ComplexDense& Var::value() const { return tape->value(id); }
ComplexDense Var::grad() const { return tape->grad(id); }

Var Tape::leaf(ComplexDense value) {
    nodes_.push_back(Node{std::move(value), {}, {}, true});
    return {this, nodes_.size() - 1};
}

Var Tape::constant(ComplexDense value) {
    nodes_.push_back(Node{std::move(value), {}, {}, false});
    return {this, nodes_.size() - 1};
}

Var Tape::record(ComplexDense value, const std::vector<Var>& parents, Backward backward) {
    const bool needs = std::any_of(parents.begin(), parents.end(), [this](Var p) { return nodes_[p.id].needs_grad; });
    nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, needs});
    return {this, nodes_.size() - 1};
}

ComplexDense Tape::grad(std::size_t id) const {
    const Node& n = nodes_[id];
    if (n.grad.size() == 0 && n.value.size() != 0) return ComplexDense(n.value.rows, n.value.cols);
    return n.grad;
}

void Tape::accumulate(std::size_t id, const ComplexDense& delta) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
        n.grad = delta;
        return;
    }
    for (std::size_t i = 0; i < delta.size(); ++i) {
        n.grad.re[i] += delta.re[i];
        n.grad.im[i] += delta.im[i];
    }
}

void Tape::accumulate(std::size_t id, ComplexDense&& delta) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
        n.grad = std::move(delta);
        return;
    }
    for (std::size_t i = 0; i < delta.size(); ++i) {
        n.grad.re[i] += delta.re[i];
        n.grad.im[i] += delta.im[i];
    }
}

void Tape::backward(Var loss) {
    if (loss.tape != this) throw InputError("backward: loss belongs to another tape");
    const ComplexDense& lv = nodes_[loss.id].value;
    if (lv.rows != 1 || lv.cols != 1) throw ShapeError("backward: loss must be a 1x1 node");
    ComplexDense seed(1, 1);
    seed.re[0] = 1.0;
    nodes_[loss.id].grad = seed;
    for (std::size_t id = loss.id + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (n.backward && n.grad.size() != 0) n.backward(*this, n.grad);
    }
}

namespace {

Tape* tape_of(Var a, Var b) {
    if (a.tape != b.tape) throw InputError("autodiff: operands live on different tapes");
    return a.tape;
}

ComplexDense transpose_spmm(const SparseReal& s, const ComplexDense& g) {
    ComplexDense out(s.cols, g.cols);
    const std::size_t d = g.cols;
    for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
            const double v = s.values[k];
            const std::size_t c = s.col_idx[k];
            for (std::size_t j = 0; j < d; ++j) {
                out.re[c * d + j] += v * g.re[r * d + j];
                out.im[c * d + j] += v * g.im[r * d + j];
            }
        }
    }
    return out;
}

double gelu_value(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_slope(double x) {
    const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + x * pdf;
}

}  // namespace

Var add(Var a, Var b) {
    Tape* t = tape_of(a, b);
    return t->record(uconv::add(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const ComplexDense& g) {
        tp.accumulate(a.id, g);
        tp.accumulate(b.id, g);
    });
}

Var sub(Var a, Var b) {
    Tape* t = tape_of(a, b);
    return t->record(uconv::sub(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const ComplexDense& g) {
        tp.accumulate(a.id, g);
        tp.accumulate(b.id, uconv::scale(g, -1.0));
    });
}

Var scale(Var a, double s) {
    return a.tape->record(uconv::scale(a.value(), s), {a},
                          [a, s](Tape& tp, const ComplexDense& g) { tp.accumulate(a.id, uconv::scale(g, s)); });
}

Var scale(Var a, cplx s) {
    return a.tape->record(uconv::scale(a.value(), s), {a}, [a, s](Tape& tp, const ComplexDense& g) {
        tp.accumulate(a.id, uconv::scale(g, std::conj(s)));
    });
}

Var scale_by(Var a, Var s, cplx c) {
    Tape* t = tape_of(a, s);
    if (s.value().size() != 1) throw ShapeError("scale_by: scalar node must be 1x1");
    const cplx factor = c * s.value().re[0];
    return t->record(uconv::scale(a.value(), factor), {a, s}, [a, s, c, factor](Tape& tp, const ComplexDense& g) {
        tp.accumulate(a.id, uconv::scale(g, std::conj(factor)));
        if (tp.needs_grad(s.id)) {
            ComplexDense gs(1, 1);
            gs.re[0] = uconv::inner(g, uconv::scale(tp.value(a.id), c)).real();
            tp.accumulate(s.id, gs);
        }
    });
}

Var matmul(Var a, Var b) {
    Tape* t = tape_of(a, b);
    return t->record(uconv::matmul(a.value(), b.value()), {a, b}, [a, b](Tape& tp, const ComplexDense& g) {
        if (tp.needs_grad(a.id)) tp.accumulate(a.id, uconv::matmul(g, uconv::conj_transpose(tp.value(b.id))));
        if (tp.needs_grad(b.id)) tp.accumulate(b.id, uconv::matmul(uconv::conj_transpose(tp.value(a.id)), g));
    });
}

Var spmm(std::shared_ptr<const SparseReal> s, Var x) {
    ComplexDense out = uconv::spmm(*s, x.value());
    return x.tape->record(std::move(out), {x}, [s = std::move(s), x](Tape& tp, const ComplexDense& g) {
        tp.accumulate(x.id, transpose_spmm(*s, g));
    });
}

namespace {

// x + sum_{k=1}^{order} (c A)^k x / k!; `last` receives the k = order term.
ComplexDense sym_series(const SparseReal& a, cplx c, const ComplexDense& x, int order, ComplexDense* last) {
    ComplexDense sum = x;
    ComplexDense term = x;
    for (int k = 1; k <= order; ++k) {
        term = uconv::scale(uconv::spmm(a, term), c / static_cast<double>(k));
        for (std::size_t i = 0; i < sum.size(); ++i) {
            sum.re[i] += term.re[i];
            sum.im[i] += term.im[i];
        }
    }
    if (last != nullptr) *last = std::move(term);
    return sum;
}

}  // namespace

Var expm_i_sym(std::shared_ptr<const SparseReal> a, Var t, Var x, int order) {
    Tape* tp = tape_of(t, x);
    if (order < 0) throw InputError("expm_i_sym: order must be non-negative");
    if (t.value().size() != 1) throw ShapeError("expm_i_sym: t must be 1x1");
    if (a->rows != a->cols || a->cols != x.value().rows) throw ShapeError("expm_i_sym: operator/feature mismatch");
    const double tv = t.value().re[0];
    auto last = std::make_shared<ComplexDense>();
    ComplexDense y = sym_series(*a, cplx{0.0, tv}, x.value(), order, last.get());
    const std::size_t y_id = tp->size();
    return tp->record(std::move(y), {t, x}, [a = std::move(a), t, x, tv, order, last, y_id](Tape& tape, const ComplexDense& g) {
        if (tape.needs_grad(x.id)) tape.accumulate(x.id, sym_series(*a, cplx{0.0, -tv}, g, order, nullptr));
        if (tape.needs_grad(t.id)) {
            ComplexDense partial = uconv::sub(tape.value(y_id), *last);
            ComplexDense dy = uconv::scale(uconv::spmm(*a, partial), cplx{0.0, 1.0});
            ComplexDense gt(1, 1);
            gt.re[0] = uconv::inner(g, dy).real();
            tape.accumulate(t.id, std::move(gt));
        }
    });
}

Var conj_transpose(Var a) {
    return a.tape->record(uconv::conj_transpose(a.value()), {a}, [a](Tape& tp, const ComplexDense& g) {
        tp.accumulate(a.id, uconv::conj_transpose(g));
    });
}

Var skew_hermitian_project(Var m) {
    return m.tape->record(uconv::skew_hermitian_project(m.value()), {m}, [m](Tape& tp, const ComplexDense& g) {
        // The projection is self-adjoint in the real inner product.
        tp.accumulate(m.id, uconv::skew_hermitian_project(g));
    });
}

Var groupsort(Var x) {
    const ComplexDense& v = x.value();
    if (v.cols % 2 != 0) throw ShapeError("groupsort: feature dimension must be even");
    const std::size_t half = v.cols / 2;
    ComplexDense out = v;
    // swapped flags per (row, pair) for real and imaginary parts
    std::vector<char> swap_re(v.rows * half, 0);
    std::vector<char> swap_im(v.rows * half, 0);
    for (std::size_t r = 0; r < v.rows; ++r) {
        for (std::size_t j = 0; j < half; ++j) {
            const std::size_t a = r * v.cols + j;
            const std::size_t b = a + half;
            if (v.re[a] < v.re[b]) {
                std::swap(out.re[a], out.re[b]);
                swap_re[r * half + j] = 1;
            }
            if (v.im[a] < v.im[b]) {
                std::swap(out.im[a], out.im[b]);
                swap_im[r * half + j] = 1;
            }
        }
    }
    return x.tape->record(std::move(out), {x},
                          [x, half, swap_re = std::move(swap_re), swap_im = std::move(swap_im)](Tape& tp,
                                                                                               const ComplexDense& g) {
                              ComplexDense gx = g;
                              for (std::size_t r = 0; r < g.rows; ++r) {
                                  for (std::size_t j = 0; j < half; ++j) {
                                      const std::size_t a = r * g.cols + j;
                                      const std::size_t b = a + half;
                                      if (swap_re[r * half + j]) std::swap(gx.re[a], gx.re[b]);
                                      if (swap_im[r * half + j]) std::swap(gx.im[a], gx.im[b]);
                                  }
                              }
                              tp.accumulate(x.id, gx);
                          });
}

Var gelu(Var x) {
    const ComplexDense& v = x.value();
    ComplexDense out(v.rows, v.cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.re[i] = gelu_value(v.re[i]);
        out.im[i] = gelu_value(v.im[i]);
    }
    return x.tape->record(std::move(out), {x}, [x](Tape& tp, const ComplexDense& g) {
        const ComplexDense& in = tp.value(x.id);
        ComplexDense gx(g.rows, g.cols);
        for (std::size_t i = 0; i < g.size(); ++i) {
            gx.re[i] = g.re[i] * gelu_slope(in.re[i]);
            gx.im[i] = g.im[i] * gelu_slope(in.im[i]);
        }
        tp.accumulate(x.id, gx);
    });
}

Var segment_mean(Var x, const std::vector<std::size_t>& offsets) {
    const ComplexDense& v = x.value();
    if (offsets.size() < 2 || offsets.back() != v.rows) throw ShapeError("segment_mean: offsets must cover all rows");
    const std::size_t segs = offsets.size() - 1;
    ComplexDense out(segs, v.cols);
    for (std::size_t s = 0; s < segs; ++s) {
        const std::size_t count = offsets[s + 1] - offsets[s];
        if (count == 0) throw ShapeError("segment_mean: empty segment");
        const double w = 1.0 / static_cast<double>(count);
        for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
            for (std::size_t c = 0; c < v.cols; ++c) {
                out.re[s * v.cols + c] += w * v.re[r * v.cols + c];
                out.im[s * v.cols + c] += w * v.im[r * v.cols + c];
            }
        }
    }
    return x.tape->record(std::move(out), {x}, [x, offsets](Tape& tp, const ComplexDense& g) {
        const ComplexDense& in = tp.value(x.id);
        ComplexDense gx(in.rows, in.cols);
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
            const double w = 1.0 / static_cast<double>(offsets[s + 1] - offsets[s]);
            for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
                for (std::size_t c = 0; c < in.cols; ++c) {
                    gx.re[r * in.cols + c] = w * g.re[s * in.cols + c];
                    gx.im[r * in.cols + c] = w * g.im[s * in.cols + c];
                }
            }
        }
        tp.accumulate(x.id, gx);
    });
}

Var realify(Var x) {
    const ComplexDense& v = x.value();
    ComplexDense out(v.rows, 2 * v.cols);
    for (std::size_t r = 0; r < v.rows; ++r) {
        for (std::size_t c = 0; c < v.cols; ++c) {
            out.re[r * 2 * v.cols + c] = v.re[r * v.cols + c];
            out.re[r * 2 * v.cols + v.cols + c] = v.im[r * v.cols + c];
        }
    }
    return x.tape->record(std::move(out), {x}, [x](Tape& tp, const ComplexDense& g) {
        const ComplexDense& in = tp.value(x.id);
        ComplexDense gx(in.rows, in.cols);
        for (std::size_t r = 0; r < in.rows; ++r) {
            for (std::size_t c = 0; c < in.cols; ++c) {
                gx.re[r * in.cols + c] = g.re[r * 2 * in.cols + c];
                gx.im[r * in.cols + c] = g.re[r * 2 * in.cols + in.cols + c];
            }
        }
        tp.accumulate(x.id, gx);
    });
}

Var add_row_bias(Var x, Var bias) {
    Tape* t = tape_of(x, bias);
    const ComplexDense& v = x.value();
    const ComplexDense& b = bias.value();
    if (b.rows != 1 || b.cols != v.cols) throw ShapeError("add_row_bias: bias must be 1 x cols");
    ComplexDense out = v;
    for (std::size_t r = 0; r < v.rows; ++r) {
        for (std::size_t c = 0; c < v.cols; ++c) {
            out.re[r * v.cols + c] += b.re[c];
            out.im[r * v.cols + c] += b.im[c];
        }
    }
    return t->record(std::move(out), {x, bias}, [x, bias](Tape& tp, const ComplexDense& g) {
        tp.accumulate(x.id, g);
        ComplexDense gb(1, g.cols);
        for (std::size_t r = 0; r < g.rows; ++r) {
            for (std::size_t c = 0; c < g.cols; ++c) {
                gb.re[c] += g.re[r * g.cols + c];
                gb.im[c] += g.im[r * g.cols + c];
            }
        }
        tp.accumulate(bias.id, gb);
    });
}

Var zero_pad(Var x, std::size_t d_out) {
    const ComplexDense& v = x.value();
    if (d_out < v.cols) throw ShapeError("zero_pad: target width smaller than input");
    ComplexDense out(v.rows, d_out);
    for (std::size_t r = 0; r < v.rows; ++r) {
        for (std::size_t c = 0; c < v.cols; ++c) {
            out.re[r * d_out + c] = v.re[r * v.cols + c];
            out.im[r * d_out + c] = v.im[r * v.cols + c];
        }
    }
    return x.tape->record(std::move(out), {x}, [x, d_out](Tape& tp, const ComplexDense& g) {
        const ComplexDense& in = tp.value(x.id);
        ComplexDense gx(in.rows, in.cols);
        for (std::size_t r = 0; r < in.rows; ++r) {
            for (std::size_t c = 0; c < in.cols; ++c) {
                gx.re[r * in.cols + c] = g.re[r * d_out + c];
                gx.im[r * in.cols + c] = g.im[r * d_out + c];
            }
        }
        tp.accumulate(x.id, gx);
    });
}

Var mae_loss(Var pred, const std::vector<double>& targets) {
    const ComplexDense& p = pred.value();
    if (p.cols != 1 || p.rows != targets.size() || targets.empty()) {
        throw ShapeError("mae_loss: predictions must be a column matching the target count");
    }
    ComplexDense out(1, 1);
    for (std::size_t i = 0; i < p.rows; ++i) out.re[0] += std::abs(p.re[i] - targets[i]);
    out.re[0] /= static_cast<double>(p.rows);
    return pred.tape->record(std::move(out), {pred}, [pred, targets](Tape& tp, const ComplexDense& g) {
        const ComplexDense& pv = tp.value(pred.id);
        ComplexDense gp(pv.rows, 1);
        const double w = g.re[0] / static_cast<double>(pv.rows);
        for (std::size_t i = 0; i < pv.rows; ++i) {
            const double diff = pv.re[i] - targets[i];
            gp.re[i] = diff > 0.0 ? w : (diff < 0.0 ? -w : 0.0);
        }
        tp.accumulate(pred.id, gp);
    });
}

Var squared_norm(Var x) {
    const double n = frobenius_norm(x.value());
    ComplexDense out(1, 1);
    out.re[0] = n * n;
    return x.tape->record(std::move(out), {x}, [x](Tape& tp, const ComplexDense& g) {
        tp.accumulate(x.id, uconv::scale(tp.value(x.id), 2.0 * g.re[0]));
    });
}

std::size_t real_coordinate_count(const ParamSet& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.value.size() * (p.real_only ? 1 : 2);
    return n;
}

Gradients finite_diff_grad(const std::function<double(const ParamSet&)>& f, const ParamSet& params, double eps) {
    Gradients grads;
    ParamSet work = params;
    for (std::size_t pi = 0; pi < work.size(); ++pi) {
        ComplexDense g(work[pi].value.rows, work[pi].value.cols);
        for (std::size_t i = 0; i < g.size(); ++i) {
            for (int part = 0; part < (work[pi].real_only ? 1 : 2); ++part) {
                double& coord = part == 0 ? work[pi].value.re[i] : work[pi].value.im[i];
                const double saved = coord;
                coord = saved + eps;
                const double fp = f(work);
                coord = saved - eps;
                const double fm = f(work);
                coord = saved;
                (part == 0 ? g.re[i] : g.im[i]) = (fp - fm) / (2.0 * eps);
            }
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

AdamState adam_init(const ParamSet& params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.emplace_back(p.value.rows, p.value.cols);
        s.v.emplace_back(p.value.rows, p.value.cols);
    }
    return s;
}

void adam_step(ParamSet& params, const Gradients& grads, AdamState& state, const AdamHyper& hyper) {
    if (grads.size() != params.size() || state.m.size() != params.size()) {
        throw ShapeError("adam_step: parameter, gradient and state counts differ");
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
    auto update = [&](double& p, double g, double& m, double& v) {
        m = hyper.beta1 * m + (1.0 - hyper.beta1) * g;
        v = hyper.beta2 * v + (1.0 - hyper.beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        p -= hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.eps);
    };
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        auto& p = params[pi];
        const auto& g = grads[pi];
        if (g.rows != p.value.rows || g.cols != p.value.cols) throw ShapeError("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            update(p.value.re[i], g.re[i], state.m[pi].re[i], state.v[pi].re[i]);
            if (!p.real_only) update(p.value.im[i], g.im[i], state.m[pi].im[i], state.v[pi].im[i]);
        }
    }
}

}  // namespace uconv::ad
