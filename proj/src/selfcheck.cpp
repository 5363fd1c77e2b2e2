#include "uconv/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "uconv/diagnostics.hpp"
#include "uconv/graphs.hpp"
#include "uconv/groups.hpp"
#include "uconv/layers.hpp"

namespace uconv {

namespace {

ComplexDense random_complex(std::size_t r, std::size_t c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    ComplexDense x(r, c);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x.re[i] = g(rng);
        x.im[i] = g(rng);
    }
    return x;
}

Structure ring6_structure() {
    auto a = std::make_shared<const SparseReal>(normalize_adjacency(ring_graph(6).adjacency));
    return make_structure({a}, {0, 6});
}

double smooth_loss(const ModelConfig& c, const ad::ParamSet& params, const Structure& s, const ComplexDense& x,
                   double target) {
    const double p = predict(c, params, s, x).front();
    return (p - target) * (p - target);
}

CheckResult bounded(std::string name, double value, double tol) { return {std::move(name), value <= tol, value, tol}; }

}  // namespace

ModelConfig gradient_check_config(LayerType type, bool unitary_map) {
    ModelConfig c = default_config(type, 2, 4, 11);
    c.taylor_K = 8;
    c.head_width = 4;
    c.unitary_feature_map = unitary_map;
    return c;
}

std::vector<GradCheckEntry> gradient_check(const ModelConfig& config, std::uint64_t seed) {
    const Structure s = ring6_structure();
    ComplexDense x(6, config.input_dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (double& v : x.re) v = unif(rng);
    const double target = 0.7;

    ad::ParamSet params = init_params(config);
    // move away from the structured init so no gradient vanishes by symmetry
    for (auto& p : params) {
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            p.value.re[i] += 0.1 * unif(rng);
            if (!p.real_only) p.value.im[i] += 0.1 * unif(rng);
        }
    }

    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const auto& p : params) vars.push_back(tape.leaf(p.value));
    const ad::Var pred = model_forward(tape, config, vars, s, tape.constant(x));
    ComplexDense y(1, 1);
    y.re[0] = target;
    const ad::Var loss = ad::squared_norm(ad::sub(pred, tape.constant(y)));
    tape.backward(loss);

    const ad::Gradients fd = ad::finite_diff_grad(
        [&](const ad::ParamSet& ps) { return smooth_loss(config, ps, s, x, target); }, params, 1e-5);

    std::vector<GradCheckEntry> out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        ComplexDense g = vars[i].grad();
        if (params[i].real_only) std::fill(g.im.begin(), g.im.end(), 0.0);
        double diff = 0.0;
        double scale_fd = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            diff = std::max({diff, std::abs(g.re[k] - fd[i].re[k]), std::abs(g.im[k] - fd[i].im[k])});
            scale_fd = std::max({scale_fd, std::abs(fd[i].re[k]), std::abs(fd[i].im[k])});
        }
        out.push_back({params[i].name, diff / std::max(scale_fd, 1e-8)});
    }
    return out;
}

std::vector<CheckResult> run_invariant_suite(CheckScope scope) {
    std::vector<CheckResult> out;
    const bool all = scope == CheckScope::All;
    const Graph g = random_connected_graph(10, 0.3, 5);
    const SparseReal a = normalize_adjacency(g.adjacency);

    out.push_back(bounded("normalized adjacency norm <= 1", operator_norm_estimate(a) - 1.0, 1e-9));
    {
        const ComplexDense x = random_complex(10, 4, 1);
        const UniConvParams p{0.8, UnitaryMap{random_complex(4, 4, 2)}};
        const double drift = std::abs(frobenius_norm(uniconv_forward(x, a, p)) - frobenius_norm(x));
        out.push_back(bounded("uniconv isometry", drift, 1e-7));
        const double gap = rayleigh_invariance_check(p, x, a);
        out.push_back(bounded("uniconv rayleigh invariance", gap, 1e-6));
    }
    {
        ComplexDense raw = random_complex(4, 4, 3);
        raw = scale(raw, 0.5 / frobenius_norm(skew_hermitian_project(raw)));
        const ComplexDense x = random_complex(10, 4, 4);
        const double drift =
            std::abs(frobenius_norm(lie_uniconv_forward(x, a, LieUniConvParams{raw})) - frobenius_norm(x));
        out.push_back(bounded("lie uniconv isometry", drift, 1e-7));
    }
    {
        const ComplexDense u = cayley_map(skew_hermitian_project(random_complex(5, 5, 6)));
        const double dev = max_abs_diff(matmul(conj_transpose(u), u), ComplexDense::identity(5));
        out.push_back(bounded("cayley map unitary", dev, 1e-10));
    }

    if (all || scope == CheckScope::Diagnose || scope == CheckScope::Propagate) {
        const double k3 = expected_rayleigh_vanilla(normalize_adjacency(complete_graph(3).adjacency));
        out.push_back(bounded("expected rayleigh on K3 = 1/2", std::abs(k3 - 0.5), 1e-12));
        const SparseReal ring = normalize_adjacency(ring_graph(12).adjacency);
        ComplexDense x0(12, 1);
        x0.re[0] = 1.0;
        const auto tr = propagation_trace(ring, x0, 20, PropagationMode::Unitary, 1.0);
        double drift = 0.0;
        for (double n : tr.norms) drift = std::max(drift, std::abs(n - tr.norms.front()));
        out.push_back(bounded("unitary propagation norm drift", drift, 1e-6));
    }

    if (all || scope == CheckScope::Diagnose) {
        VanillaConvParams witness{ComplexDense::from_real(1, 1, {1.0}), ComplexDense::from_real(1, 1, {1.0})};
        const SparseReal k2 = complete_graph(2).adjacency;
        const double gap = jacobian_isometry_gap(
            [&](const ComplexDense& x) { return vanilla_conv_forward(x, k2, witness); }, random_complex(2, 1, 7));
        out.push_back(bounded("vanilla witness gap = 3", std::abs(gap - 3.0), 1e-6));
    }

    if (all || scope == CheckScope::Train) {
        for (LayerType t : {LayerType::UniConv, LayerType::LieUniConv, LayerType::Vanilla, LayerType::VanillaResidual}) {
            double worst = 0.0;
            for (const auto& e : gradient_check(gradient_check_config(t), 13)) worst = std::max(worst, e.rel_error);
            out.push_back(bounded("gradient check " + to_string(t), worst, 1e-4));
        }
    }

    if (all) {
        for (std::size_t n : {4, 5}) {
            const FiniteGroup grp = dihedral_group(n);
            const IrrepSet irreps = dihedral_irreps(n);
            const GroupSignal x = [&] {
                const ComplexDense c = random_complex(grp.order, 1, 8 + n);
                GroupSignal v(grp.order);
                for (std::size_t i = 0; i < grp.order; ++i) v[i] = c(i, 0);
                return v;
            }();
            const GroupSignal back =
                inverse_group_fourier_transform(grp, irreps, group_fourier_transform(grp, irreps, x));
            double err = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(back[i] - x[i]));
            out.push_back(bounded("fourier round trip D" + std::to_string(n), err, 1e-10));
            out.push_back({"irreps valid D" + std::to_string(n), validate_irreps(grp, irreps), 0.0, 0.0});
            out.push_back({"group axioms D" + std::to_string(n), validate_group(grp), 0.0, 0.0});
        }
    }
    return out;
}

}  // namespace uconv
