#include "uconv/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "uconv/graphs.hpp"
#include "uconv/layers.hpp"

namespace uconv {

std::string to_string(LayerType t) {
    switch (t) {
        case LayerType::UniConv: return "uniconv";
        case LayerType::LieUniConv: return "lie_uniconv";
        case LayerType::Vanilla: return "vanilla";
        case LayerType::VanillaResidual: return "vanilla_residual";
    }
    return "unknown";
}

std::string to_string(Activation a) { return a == Activation::GroupSort ? "groupsort" : "gelu"; }

LayerType parse_layer_type(const std::string& s) {
    if (s == "uniconv") return LayerType::UniConv;
    if (s == "lie_uniconv") return LayerType::LieUniConv;
    if (s == "vanilla") return LayerType::Vanilla;
    if (s == "vanilla_residual") return LayerType::VanillaResidual;
    throw InputError("unknown layer type '" + s + "'");
}

Activation parse_activation(const std::string& s) {
    if (s == "groupsort") return Activation::GroupSort;
    if (s == "gelu") return Activation::Gelu;
    throw InputError("unknown activation '" + s + "'");
}

namespace {

bool is_unitary(LayerType t) { return t == LayerType::UniConv || t == LayerType::LieUniConv; }

ComplexDense glorot(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> unif(-bound, bound);
    ComplexDense w(rows, cols);
    for (double& v : w.re) v = unif(rng);
    return w;
}

std::uint64_t layer_seed(std::uint64_t seed, std::size_t layer, std::size_t slot) {
    return mix_seed(seed ^ mix_seed(1000003ULL * (layer + 1) + slot));
}

ad::Var sum_vars(const std::vector<ad::Var>& terms) {
    ad::Var acc = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) acc = ad::add(acc, terms[i]);
    return acc;
}

}  // namespace

ModelConfig default_config(LayerType type, std::size_t n_layers, std::size_t hidden_dim, std::uint64_t seed) {
    ModelConfig c;
    c.layer_type = type;
    c.n_layers = n_layers;
    c.hidden_dim = hidden_dim;
    c.head_width = hidden_dim;
    c.seed = seed;
    c.activation = is_unitary(type) ? Activation::GroupSort : Activation::Gelu;
    return c;
}

void validate_config(const ModelConfig& c) {
    if (c.n_layers == 0 || c.hidden_dim == 0 || c.head_width == 0 || c.input_dim == 0) {
        throw InputError("model config: layers, widths and input dimension must be positive");
    }
    if (c.activation == Activation::GroupSort && c.hidden_dim % 2 != 0) {
        throw InputError("model config: groupsort requires an even hidden_dim, got " + std::to_string(c.hidden_dim));
    }
    if (c.embedding == Embedding::ZeroPad && c.input_dim > c.hidden_dim) {
        throw InputError("model config: zero-pad embedding needs hidden_dim >= input_dim");
    }
    if (c.taylor_K < 0 || c.feature_map_K < 0) throw InputError("model config: Taylor orders must be non-negative");
    if (c.op_symmetric.empty()) throw InputError("model config: at least one structure operator required");
    if (c.layer_type == LayerType::UniConv) {
        for (bool sym : c.op_symmetric) {
            if (!sym) throw InputError("model config: uniconv needs symmetric structure operators");
        }
    }
}

double lr_for_depth(std::size_t n_layers) {
    if (n_layers <= 7) return 7e-4;
    if (n_layers <= 15) return 3e-4;
    return 1e-4;
}

Structure make_structure(std::vector<std::shared_ptr<const SparseReal>> ops, std::vector<std::size_t> offsets) {
    Structure s;
    for (const auto& op : ops) {
        if (op->rows != op->cols) throw ShapeError("structure operators must be square");
        if (op->rows != offsets.back()) throw ShapeError("structure operator size disagrees with the row offsets");
        s.ops_t.push_back(std::make_shared<const SparseReal>(op->transpose()));
    }
    s.ops = std::move(ops);
    s.offsets = std::move(offsets);
    return s;
}

ad::ParamSet init_params(const ModelConfig& c) {
    validate_config(c);
    std::mt19937_64 rng(mix_seed(c.seed));
    const std::size_t d = c.hidden_dim;
    const std::size_t n_ops = c.op_symmetric.size();
    ad::ParamSet ps;
    if (c.embedding == Embedding::Linear) ps.push_back({"embed", glorot(c.input_dim, d, rng), true});
    auto unit_t = [] {
        ComplexDense t(1, 1);
        t.re[0] = 1.0;
        return t;
    };
    if (c.layer_type == LayerType::UniConv && c.shared_t) {
        for (std::size_t i = 0; i < n_ops; ++i) ps.push_back({"t" + std::to_string(i), unit_t(), true});
    }
    for (std::size_t l = 0; l < c.n_layers; ++l) {
        const std::string pre = "layer" + std::to_string(l) + ".";
        switch (c.layer_type) {
            case LayerType::UniConv: {
                if (!c.shared_t) {
                    for (std::size_t i = 0; i < n_ops; ++i) ps.push_back({pre + "t" + std::to_string(i), unit_t(), true});
                }
                const ComplexDense b = init_skew_blocks(d, layer_seed(c.seed, l, 0));
                if (c.unitary_feature_map) {
                    ps.push_back({pre + "B", b, false});
                } else {
                    ps.push_back({pre + "U", unitary_from_skew(b), false});
                }
                break;
            }
            case LayerType::LieUniConv: {
                // Generator scaled so the summed action has norm at most 1 at init.
                const double shrink = 1.0 / (std::numbers::pi * static_cast<double>(n_ops));
                for (std::size_t i = 0; i < n_ops; ++i) {
                    ps.push_back({pre + "M" + std::to_string(i),
                                  scale(init_skew_blocks(d, layer_seed(c.seed, l, i + 1)), shrink), false});
                }
                break;
            }
            case LayerType::Vanilla:
            case LayerType::VanillaResidual: {
                if (c.vanilla_self_term) ps.push_back({pre + "W0", glorot(d, d, rng), true});
                for (std::size_t i = 0; i < n_ops; ++i) {
                    ps.push_back({pre + "W" + std::to_string(i + 1), glorot(d, d, rng), true});
                    if (!c.op_symmetric[i]) ps.push_back({pre + "W" + std::to_string(i + 1) + "t", glorot(d, d, rng), true});
                }
                break;
            }
        }
    }
    ps.push_back({"head.W1", glorot(2 * d, c.head_width, rng), true});
    ps.push_back({"head.b1", ComplexDense(1, c.head_width), true});
    ps.push_back({"head.W2", glorot(c.head_width, 1, rng), true});
    ps.push_back({"head.b2", ComplexDense(1, 1), true});
    return ps;
}

ad::Var model_forward(ad::Tape& tape, const ModelConfig& c, const std::vector<ad::Var>& params, const Structure& s,
                      ad::Var x, ForwardTrace* trace) {
    using ad::Var;
    validate_config(c);
    const std::size_t n_ops = c.op_symmetric.size();
    if (s.ops.size() != n_ops) throw ShapeError("model_forward: config expects " + std::to_string(n_ops) + " operators");
    if (x.value().rows != s.offsets.back() || x.value().cols != c.input_dim) {
        throw ShapeError("model_forward: features must be rows x input_dim");
    }
    for (std::size_t i = 0; i < n_ops; ++i) {
        if (c.op_symmetric[i] && !s.ops[i]->is_structurally_symmetric(1e-12)) {
            throw InputError("model_forward: operator " + std::to_string(i) + " is declared symmetric but is not");
        }
    }
    std::size_t next = 0;
    auto take = [&]() -> Var {
        if (next >= params.size()) throw ShapeError("model_forward: too few parameters for the config");
        return params[next++];
    };

    Var h = c.embedding == Embedding::Linear ? ad::matmul(x, take()) : ad::zero_pad(x, c.hidden_dim);
    if (trace != nullptr) {
        trace->embed_norm = frobenius_norm(h.value());
        trace->layer_norms.clear();
    }

    std::vector<Var> shared_t;
    if (c.layer_type == LayerType::UniConv && c.shared_t) {
        for (std::size_t i = 0; i < n_ops; ++i) shared_t.push_back(take());
    }

    for (std::size_t l = 0; l < c.n_layers; ++l) {
        Var out = h;
        switch (c.layer_type) {
            case LayerType::UniConv: {
                std::vector<Var> ts = shared_t;
                if (!c.shared_t) {
                    for (std::size_t i = 0; i < n_ops; ++i) ts.push_back(take());
                }
                Var fm = take();
                auto action = [&](Var z) {
                    std::vector<Var> terms;
                    for (std::size_t i = 0; i < n_ops; ++i) terms.push_back(ad::scale_by(ad::spmm(s.ops[i], z), ts[i], cplx{0.0, 1.0}));
                    return sum_vars(terms);
                };
                Var u = fm;
                if (c.unitary_feature_map) {
                    Var gen = ad::skew_hermitian_project(fm);
                    Var eye = tape.constant(ComplexDense::identity(c.hidden_dim));
                    u = taylor_series([&](Var z) { return ad::matmul(z, gen); }, eye, c.feature_map_K);
                }
                Var propagated = n_ops == 1 ? ad::expm_i_sym(s.ops[0], ts[0], h, c.taylor_K)
                                            : taylor_series(action, h, c.taylor_K);
                out = ad::matmul(propagated, u);
                break;
            }
            case LayerType::LieUniConv: {
                std::vector<Var> w;
                std::vector<Var> w_adj;
                for (std::size_t i = 0; i < n_ops; ++i) {
                    Var m = take();
                    if (c.op_symmetric[i]) {
                        w.push_back(ad::skew_hermitian_project(m));
                        w_adj.push_back(w.back());
                    } else {
                        w.push_back(ad::scale(m, 0.5));
                        w_adj.push_back(ad::scale(ad::conj_transpose(m), 0.5));
                    }
                }
                auto action = [&](Var z) {
                    std::vector<Var> terms;
                    for (std::size_t i = 0; i < n_ops; ++i) {
                        terms.push_back(ad::spmm(s.ops[i], ad::matmul(z, w[i])));
                        if (!c.op_symmetric[i]) {
                            terms.push_back(ad::scale(ad::spmm(s.ops_t[i], ad::matmul(z, w_adj[i])), -1.0));
                        }
                    }
                    return sum_vars(terms);
                };
                out = taylor_series(action, h, c.taylor_K);
                break;
            }
            case LayerType::Vanilla:
            case LayerType::VanillaResidual: {
                std::vector<Var> terms;
                if (c.vanilla_self_term) terms.push_back(ad::matmul(h, take()));
                for (std::size_t i = 0; i < n_ops; ++i) {
                    terms.push_back(ad::spmm(s.ops[i], ad::matmul(h, take())));
                    if (!c.op_symmetric[i]) terms.push_back(ad::spmm(s.ops_t[i], ad::matmul(h, take())));
                }
                out = sum_vars(terms);
                break;
            }
        }
        if (trace != nullptr) trace->layer_norms.push_back(frobenius_norm(out.value()));
        out = c.activation == Activation::GroupSort ? ad::groupsort(out) : ad::gelu(out);
        h = c.layer_type == LayerType::VanillaResidual ? ad::add(h, out) : out;
    }

    Var pooled = ad::realify(ad::segment_mean(h, s.offsets));
    Var w1 = take();
    Var b1 = take();
    Var w2 = take();
    Var b2 = take();
    if (next != params.size()) throw ShapeError("model_forward: more parameters than the config uses");
    Var hidden = ad::gelu(ad::add_row_bias(ad::matmul(pooled, w1), b1));
    return ad::add_row_bias(ad::matmul(hidden, w2), b2);
}

std::vector<double> predict(const ModelConfig& c, const ad::ParamSet& params, const Structure& s,
                            const ComplexDense& x, ForwardTrace* trace) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    vars.reserve(params.size());
    for (const auto& p : params) vars.push_back(tape.constant(p.value));
    const ad::Var out = model_forward(tape, c, vars, s, tape.constant(x), trace);
    return out.value().re;
}

LossAndGrad mae_loss_and_grad(const ModelConfig& c, const ad::ParamSet& params, const Structure& s,
                              const ComplexDense& x, const std::vector<double>& targets) {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    vars.reserve(params.size());
    for (const auto& p : params) vars.push_back(tape.leaf(p.value));
    const ad::Var pred = model_forward(tape, c, vars, s, tape.constant(x));
    const ad::Var loss = ad::mae_loss(pred, targets);
    tape.backward(loss);
    LossAndGrad r;
    r.loss = loss.value().re[0];
    r.predictions = pred.value().re;
    for (std::size_t i = 0; i < params.size(); ++i) {
        ComplexDense g = vars[i].grad();
        if (params[i].real_only) std::fill(g.im.begin(), g.im.end(), 0.0);
        r.grads.push_back(std::move(g));
    }
    return r;
}

}  // namespace uconv
