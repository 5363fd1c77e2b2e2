#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "uconv/autodiff.hpp"
#include "uconv/expmap.hpp"
#include "uconv/numerics.hpp"

namespace uconv {

enum class LayerType { UniConv, LieUniConv, Vanilla, VanillaResidual };
enum class Activation { GroupSort, Gelu };
enum class Embedding { Linear, ZeroPad };

std::string to_string(LayerType t);
std::string to_string(Activation a);
LayerType parse_layer_type(const std::string& s);
Activation parse_activation(const std::string& s);

struct ModelConfig {
    LayerType layer_type = LayerType::UniConv;
    std::size_t n_layers = 2;
    std::size_t hidden_dim = 8;
    int taylor_K = kDefaultTaylorOrder;
    Activation activation = Activation::GroupSort;
    std::size_t head_width = 16;
    std::uint64_t seed = 0;

    std::size_t input_dim = 1;
    Embedding embedding = Embedding::Linear;
    /// UniConv only: U = exp(skew(B)) inside the forward pass instead of a free matrix.
    bool unitary_feature_map = false;
    int feature_map_K = 24;
    /// UniConv only: one t for all layers instead of one per layer.
    bool shared_t = false;
    /// One entry per structure operator; false means the layers also use its
    /// transpose, so the operator set is closed under adjoints.
    std::vector<bool> op_symmetric{true};
    /// Vanilla only: include the X W0 term. Off means the filter is supported
    /// on the structure operators alone.
    bool vanilla_self_term = true;
};

/// GroupSort for the unitary layers and GELU for the vanilla ones.
ModelConfig default_config(LayerType type, std::size_t n_layers, std::size_t hidden_dim, std::uint64_t seed);

/// Throws InputError for inconsistent configs (odd width with GroupSort,
/// zero layers or width, zero-pad narrower than the input).
void validate_config(const ModelConfig& c);

/// 7e-4 / 3e-4 / 1e-4 for 5 / 10 / 20 layers, nearest depth otherwise.
double lr_for_depth(std::size_t n_layers);

/// Row-block structure of a batch: each operator is block diagonal over the
/// samples, offsets delimit the samples' rows.
struct Structure {
    std::vector<std::shared_ptr<const SparseReal>> ops;
    std::vector<std::shared_ptr<const SparseReal>> ops_t;  // transposes
    std::vector<std::size_t> offsets;
};

Structure make_structure(std::vector<std::shared_ptr<const SparseReal>> ops, std::vector<std::size_t> offsets);

struct ForwardTrace {
    double embed_norm = 0.0;
    std::vector<double> layer_norms;  // after each conv layer, before the activation
};

ad::ParamSet init_params(const ModelConfig& c);

/// Predictions (one row per sample, real part meaningful) for `x` on the tape.
/// `params` are the tape handles for init_params' layout, in order.
ad::Var model_forward(ad::Tape& tape, const ModelConfig& c, const std::vector<ad::Var>& params, const Structure& s,
                      ad::Var x, ForwardTrace* trace = nullptr);

/// Forward pass without gradients.
std::vector<double> predict(const ModelConfig& c, const ad::ParamSet& params, const Structure& s,
                            const ComplexDense& x, ForwardTrace* trace = nullptr);

/// Loss and gradients of mae over the batch.
struct LossAndGrad {
    double loss = 0.0;
    ad::Gradients grads;
    std::vector<double> predictions;
};

LossAndGrad mae_loss_and_grad(const ModelConfig& c, const ad::ParamSet& params, const Structure& s,
                              const ComplexDense& x, const std::vector<double>& targets);

}  // namespace uconv
