#pragma once

#include <string>
#include <vector>

#include "uconv/model.hpp"

namespace uconv {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;
};

struct GradCheckEntry {
    std::string param;
    double rel_error = 0.0;  // max |autodiff - fd| / max |fd| over the tensor
};

/// Autodiff against central differences (eps 1e-5) for a small model on the
/// 6-node ring: d = 4, 2 layers, K = 8, smooth loss sum (pred - y)^2.
std::vector<GradCheckEntry> gradient_check(const ModelConfig& config, std::uint64_t seed);

/// The config gradient_check uses for a layer type; `unitary_map` selects
/// U = exp(skew B) for UniConv.
ModelConfig gradient_check_config(LayerType type, bool unitary_map = false);

enum class CheckScope { Propagate, Train, Diagnose, All };

/// Fast invariant suite run by the CLI's --check flag.
std::vector<CheckResult> run_invariant_suite(CheckScope scope);

}  // namespace uconv
