#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <random>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uconv/diagnostics.hpp"
#include "uconv/graphs.hpp"
#include "uconv/groups.hpp"
#include "uconv/layers.hpp"
#include "uconv/model.hpp"
#include "uconv/selfcheck.hpp"
#include "uconv/train.hpp"

namespace {

using namespace uconv;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::uint64_t seed = 0;
    std::string out = "-";
    std::string graph = "ring:80";
    int K = kDefaultTaylorOrder;
    bool check = false;
    unsigned threads = 1;
};

// Shortest round-trip decimal, independent of the global locale.
std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

Graph parse_graph(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw UsageError("--graph must look like ring:<n>, complete:<n>, path:<n> or file:<path>");
    const std::string kind = spec.substr(0, colon);
    const std::string arg = spec.substr(colon + 1);
    if (kind == "file") return read_edge_list_file(arg);
    std::size_t n = 0;
    try {
        std::size_t used = 0;
        n = std::stoul(arg, &used);
        if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
        throw UsageError("--graph: '" + arg + "' is not a node count");
    }
    if (kind == "ring") return ring_graph(n);
    if (kind == "complete") return complete_graph(n);
    if (kind == "path") return path_graph(n);
    throw UsageError("--graph: unknown generator '" + kind + "'");
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_.open(path);
            if (!file_) throw UsageError("cannot open output file '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

void run_checks(CheckScope scope) {
    for (const auto& r : run_invariant_suite(scope)) {
        if (!r.passed) {
            throw NumericError("invariant check failed: " + r.name + " (value " + num(r.value) + ", tolerance " +
                               num(r.tolerance) + ")");
        }
    }
}

ComplexDense random_complex(std::size_t r, std::size_t c, std::uint64_t seed, double scale_by = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale_by);
    ComplexDense x(r, c);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x.re[i] = g(rng);
        x.im[i] = g(rng);
    }
    return x;
}

// ---------------------------------------------------------------- propagate

struct PropagateArgs {
    std::string mode = "unitary";
    std::size_t steps = 200;
    double t = 1.0;
    double c = 0.0;  // 0 selects 1 / (1 + ||A||)
    std::size_t source = 0;
};

int cmd_propagate(const Common& cm, const PropagateArgs& pa) {
    if (cm.check) run_checks(CheckScope::Propagate);
    if (pa.mode != "unitary" && pa.mode != "standard") throw UsageError("--mode must be unitary or standard");
    const Graph g = parse_graph(cm.graph);
    if (pa.source >= g.n) throw UsageError("--source out of range");
    const SparseReal a = normalize_adjacency(g.adjacency);
    const bool unitary = pa.mode == "unitary";
    const double scalar = unitary ? pa.t : (pa.c > 0.0 ? pa.c : standard_propagation_constant(a));
    ComplexDense x0(g.n, 1);
    x0.re[pa.source] = 1.0;
    const auto tr = propagation_trace(a, x0, pa.steps, unitary ? PropagationMode::Unitary : PropagationMode::Standard,
                                      scalar, cm.K);

    Output out(cm.out);
    std::ostream& os = out.stream();
    os << "# config: propagate graph=" << cm.graph << " mode=" << pa.mode << " steps=" << pa.steps
       << " scalar=" << num(scalar) << " source=" << pa.source << " K=" << cm.K << " seed=" << cm.seed << "\n";
    os << "step,mode,frobenius_norm,dirichlet,rayleigh,cos_dominant";
    for (std::size_t i = 0; i < g.n; ++i) os << ",abs_" << i;
    os << "\n";
    for (std::size_t s = 0; s < tr.states.size(); ++s) {
        os << s << "," << pa.mode << "," << num(tr.norms[s]) << "," << num(tr.dirichlet[s]) << ","
           << num(tr.rayleigh[s]) << "," << num(cosine_to_dominant(tr.states[s], g.degrees));
        for (std::size_t i = 0; i < g.n; ++i) os << "," << num(std::abs(tr.states[s](i, 0)));
        os << "\n";
    }
    return 0;
}

// -------------------------------------------------------------------- train

struct TrainArgs {
    std::string task = "ring";
    std::string layer = "uniconv";
    std::string activation;  // empty: groupsort for unitary layers, gelu otherwise
    std::size_t layers = 10;
    std::size_t hidden = 32;
    std::size_t head = 0;  // 0: same as hidden
    std::size_t epochs = 30;
    double lr = 0.0;  // 0: depth-indexed default
    std::size_t samples = 1000;
    std::size_t nodes = 20;
    std::size_t group_n = 8;
    std::size_t batch = 32;
    bool unitary_map = false;
    bool shared_t = false;
    bool zero_pad = false;
    std::string dump;
};

void dump_params(const ad::ParamSet& params, const std::string& path) {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw UsageError("cannot open dump file '" + path + "'");
    std::ostringstream manifest;
    manifest << "uconv-params float64-le";
    std::size_t count = 0;
    auto put = [&](double v) {
        unsigned char bytes[8];
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
        bin.write(reinterpret_cast<const char*>(bytes), 8);
        ++count;
    };
    for (const auto& p : params) {
        manifest << " " << p.name << ":" << p.value.rows << "x" << p.value.cols << (p.real_only ? ":re" : ":re,im");
        for (double v : p.value.re) put(v);
        if (!p.real_only) {
            for (double v : p.value.im) put(v);
        }
    }
    manifest << " total=" << count;
    std::ofstream(path + ".manifest") << manifest.str() << "\n";
}

int cmd_train(const Common& cm, const TrainArgs& ta) {
    if (cm.check) run_checks(CheckScope::Train);
    TrainSet set;
    if (ta.task == "ring") {
        set = make_train_set(ring_distance_dataset(ta.nodes, ta.samples, cm.seed));
    } else if (ta.task == "dihedral") {
        set = make_train_set(dihedral_distance_dataset(ta.group_n, ta.samples, cm.seed));
    } else {
        throw UsageError("--task must be ring or dihedral");
    }
    ModelConfig c = default_config(parse_layer_type(ta.layer), ta.layers, ta.hidden, cm.seed);
    if (!ta.activation.empty()) c.activation = parse_activation(ta.activation);
    if (ta.head != 0) c.head_width = ta.head;
    c.taylor_K = cm.K;
    c.unitary_feature_map = ta.unitary_map;
    c.shared_t = ta.shared_t;
    c.embedding = ta.zero_pad ? Embedding::ZeroPad : Embedding::Linear;
    c.op_symmetric = set.op_symmetric;
    // dihedral vanilla filters live on the generators only
    c.vanilla_self_term = ta.task == "ring";
    validate_config(c);

    TrainOptions opt;
    opt.epochs = ta.epochs;
    opt.lr = ta.lr > 0.0 ? ta.lr : (ta.task == "dihedral" ? 1e-3 : lr_for_depth(ta.layers));
    opt.batch_size = ta.batch;
    opt.shuffle_seed = cm.seed;
    const TrainResult r = train(c, set, opt);

    Output out(cm.out);
    std::ostream& os = out.stream();
    os << "# config: train task=" << ta.task << " layer=" << ta.layer << " activation=" << to_string(c.activation)
       << " layers=" << ta.layers << " hidden=" << ta.hidden << " head=" << c.head_width << " epochs=" << ta.epochs
       << " lr=" << num(opt.lr) << " samples=" << ta.samples
       << (ta.task == "ring" ? " nodes=" + std::to_string(ta.nodes) : " group_n=" + std::to_string(ta.group_n))
       << " batch=" << ta.batch << " unitary_map=" << ta.unitary_map << " shared_t=" << ta.shared_t
       << " zero_pad=" << ta.zero_pad << " K=" << cm.K << " seed=" << cm.seed << "\n";
    os << "epoch,train_mae,val_mae,test_mae\n";
    for (std::size_t e = 0; e < r.history.epochs.size(); ++e) {
        const auto& h = r.history.epochs[e];
        os << e + 1 << "," << num(h.train_mae) << "," << num(h.val_mae) << "," << num(h.test_mae) << "\n";
    }
    const double final_test = evaluate_mae(c, r.params, set, set.split.test);
    os << "# summary: final_test_mae=" << num(final_test)
       << " trivial_test_mae=" << num(trivial_mae(set, set.split.test))
       << " trivial_train_mae=" << num(trivial_mae(set, set.split.train)) << "\n";
    if (!ta.dump.empty()) dump_params(r.params, ta.dump);
    return 0;
}

// ----------------------------------------------------------------- diagnose

struct DiagnoseArgs {
    std::size_t samples = 5;
    std::size_t d = 4;
    std::size_t trials = 200;
    std::size_t jac_d = 2;
};

int cmd_diagnose(const Common& cm, const DiagnoseArgs& da) {
    if (cm.check) run_checks(CheckScope::Diagnose);
    if (da.d == 0 || da.jac_d == 0 || da.samples == 0 || da.trials == 0) throw UsageError("sizes must be positive");
    const Graph g = parse_graph(cm.graph);
    const SparseReal a = normalize_adjacency(g.adjacency);
    const double a_norm = operator_norm_estimate(a);

    Output out(cm.out);
    std::ostream& os = out.stream();
    os << "# config: diagnose graph=" << cm.graph << " samples=" << da.samples << " d=" << da.d
       << " trials=" << da.trials << " jac_d=" << da.jac_d << " K=" << cm.K << " threads=" << cm.threads
       << " seed=" << cm.seed << "\n";
    os << "metric,variant,index,value\n";
    auto row = [&](const std::string& metric, const std::string& variant, std::size_t idx, double v) {
        os << metric << "," << variant << "," << idx << "," << num(v) << "\n";
    };

    row("operator_norm", "normalized_adjacency", 0, a_norm);
    if (g.edges.empty()) {
        os << "# expected_rayleigh_vanilla undefined: graph has no edges\n";
    } else {
        row("expected_rayleigh_vanilla", "formula", 0, expected_rayleigh_vanilla(a));
    }

    for (std::size_t i = 0; i < da.samples; ++i) {
        const std::uint64_t s = mix_seed(cm.seed ^ (i + 1));
        const ComplexDense x = random_complex(g.n, da.d, s);
        std::mt19937_64 rng(s);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        const UniConvParams up{unif(rng), UnitaryMap{random_complex(da.d, da.d, s + 1)}};
        ComplexDense raw = random_complex(da.d, da.d, s + 2);
        raw = scale(raw, 1.0 / std::max(1.0, frobenius_norm(skew_hermitian_project(raw))));
        const LieUniConvParams lp{raw};
        const VanillaConvParams vp{random_complex(da.d, da.d, s + 3, 0.5), random_complex(da.d, da.d, s + 4, 0.5)};
        row("rayleigh_gap", "uniconv", i, rayleigh_invariance_check(up, x, a, cm.K));
        row("rayleigh_gap", "lie_uniconv", i, rayleigh_invariance_check(lp, x, a, cm.K));
        row("rayleigh_gap", "vanilla", i, rayleigh_invariance_check(vp, x, a, cm.K));
        row("taylor_error_bound", "uniconv", i, taylor_error_bound(uniconv_action_norm(up, a_norm), frobenius_norm(x), cm.K));
        row("taylor_error_bound", "lie_uniconv", i,
            taylor_error_bound(lie_uniconv_action_norm(lp, a_norm), frobenius_norm(x), cm.K));
    }

    const MonteCarloResult mc = oversmoothing_monte_carlo(a, da.d, da.trials, cm.seed, cm.threads);
    row("mc_rayleigh_before", "vanilla_orthogonal", 0, mc.mean_before);
    row("mc_rayleigh_after", "vanilla_orthogonal", 0, mc.mean_after);

    if (g.n * da.jac_d > 512) {
        os << "# isometry_gap skipped: n * jac_d > 512\n";
    } else {
        const std::uint64_t s = mix_seed(cm.seed ^ 0xfeedULL);
        const ComplexDense x = random_complex(g.n, da.jac_d, s);
        const UniConvParams up{0.7, UnitaryMap{random_complex(da.jac_d, da.jac_d, s + 1)}};
        ComplexDense raw = random_complex(da.jac_d, da.jac_d, s + 2);
        raw = scale(raw, 1.0 / std::max(1.0, frobenius_norm(skew_hermitian_project(raw))));
        const VanillaConvParams vp{random_complex(da.jac_d, da.jac_d, s + 3, 0.5),
                                   random_complex(da.jac_d, da.jac_d, s + 4, 0.5)};
        row("isometry_gap", "uniconv", 0,
            jacobian_isometry_gap([&](const ComplexDense& z) { return uniconv_forward(z, a, up, cm.K); }, x));
        row("isometry_gap", "lie_uniconv", 0, jacobian_isometry_gap([&](const ComplexDense& z) {
                return lie_uniconv_forward(z, a, LieUniConvParams{raw}, cm.K);
            }, x));
        row("isometry_gap", "vanilla", 0,
            jacobian_isometry_gap([&](const ComplexDense& z) { return vanilla_conv_forward(z, a, vp); }, x));
    }
    return 0;
}

// -------------------------------------------------------------------- check

int cmd_check(const Common& cm) {
    Output out(cm.out);
    std::ostream& os = out.stream();
    os << "# config: check seed=" << cm.seed << "\n";
    os << "check,value,tolerance,passed\n";
    bool ok = true;
    for (const auto& r : run_invariant_suite(CheckScope::All)) {
        os << r.name << "," << num(r.value) << "," << num(r.tolerance) << "," << (r.passed ? 1 : 0) << "\n";
        ok = ok && r.passed;
    }
    return ok ? 0 : kExitNumeric;
}

void add_common(CLI::App* sub, Common& cm) {
    sub->add_option("--seed", cm.seed, "RNG seed");
    sub->add_option("--out", cm.out, "output path, '-' for stdout");
    sub->add_option("--graph", cm.graph, "ring:<n> | complete:<n> | path:<n> | file:<path>");
    sub->add_option("--K", cm.K, "Taylor truncation order")->check(CLI::NonNegativeNumber);
    sub->add_flag("--check", cm.check, "run the invariant suite first and abort on failure");
    sub->add_option("--threads", cm.threads, "worker threads for Monte-Carlo trials")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unitary graph and group convolution experiments"};
    app.require_subcommand(1);

    Common cm;
    PropagateArgs pa;
    TrainArgs ta;
    DiagnoseArgs da;

    auto* prop = app.add_subcommand("propagate", "linear vs unitary message passing trace");
    add_common(prop, cm);
    prop->add_option("--mode", pa.mode, "unitary | standard");
    prop->add_option("--steps", pa.steps, "number of propagation steps");
    prop->add_option("--t", pa.t, "unitary step size t in exp(i t A)");
    prop->add_option("--c", pa.c, "standard-mode constant, default 1/(1+||A||)");
    prop->add_option("--source", pa.source, "node holding the initial unit impulse");

    auto* tr = app.add_subcommand("train", "train on the ring or dihedral distance task");
    add_common(tr, cm);
    tr->add_option("--task", ta.task, "ring | dihedral");
    tr->add_option("--layer", ta.layer, "uniconv | lie_uniconv | vanilla | vanilla_residual");
    tr->add_option("--activation", ta.activation, "groupsort | gelu");
    tr->add_option("--layers", ta.layers, "number of conv layers");
    tr->add_option("--hidden", ta.hidden, "hidden width");
    tr->add_option("--head", ta.head, "MLP hidden width (default: hidden)");
    tr->add_option("--epochs", ta.epochs, "training epochs");
    tr->add_option("--lr", ta.lr, "Adam learning rate (default: by depth; 1e-3 for dihedral)");
    tr->add_option("--samples", ta.samples, "dataset size");
    tr->add_option("--nodes", ta.nodes, "ring size for the ring task");
    tr->add_option("--group-n", ta.group_n, "n of D_n for the dihedral task");
    tr->add_option("--batch", ta.batch, "mini-batch size");
    tr->add_flag("--unitary-map", ta.unitary_map, "UniConv feature map U = exp(skew B)");
    tr->add_flag("--shared-t", ta.shared_t, "one UniConv t for all layers");
    tr->add_flag("--zero-pad", ta.zero_pad, "zero-pad embedding instead of a linear map");
    tr->add_option("--dump", ta.dump, "write final parameters (float64 LE) plus a .manifest line");

    auto* diag = app.add_subcommand("diagnose", "Rayleigh, Monte-Carlo, isometry and Taylor-bound diagnostics");
    add_common(diag, cm);
    diag->add_option("--samples", da.samples, "random parameter draws per layer type");
    diag->add_option("--d", da.d, "feature width");
    diag->add_option("--trials", da.trials, "Monte-Carlo trials");
    diag->add_option("--jac-d", da.jac_d, "feature width for Jacobian gaps");

    auto* chk = app.add_subcommand("check", "run the full invariant suite");
    add_common(chk, cm);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (prop->parsed()) return cmd_propagate(cm, pa);
        if (tr->parsed()) return cmd_train(cm, ta);
        if (diag->parsed()) return cmd_diagnose(cm, da);
        return cmd_check(cm);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        // InputError and ShapeError: bad configuration or input files
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    }
}
