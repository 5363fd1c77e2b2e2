#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "support.hpp"
#include "uconv/autodiff.hpp"
#include "uconv/graphs.hpp"
#include "uconv/layers.hpp"
#include "uconv/model.hpp"
#include "uconv/selfcheck.hpp"
#include "uconv/train.hpp"

using namespace uconv;
using namespace testing_support;

namespace {

using OpFn = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

// Loss ||op(params) - C||_F^2 with a fixed random C; returns the max relative
// error of the tape gradient against central differences.
double op_grad_error(const OpFn& op, ad::ParamSet params, std::uint64_t seed) {
    ComplexDense target;
    auto loss_value = [&](const ad::ParamSet& ps, std::vector<ad::Var>* leaves, ad::Tape& tape) {
        std::vector<ad::Var> vars;
        for (const auto& p : ps) vars.push_back(tape.leaf(p.value));
        const ad::Var out = op(tape, vars);
        if (target.size() == 0) target = random_complex(out.value().rows, out.value().cols, seed);
        const ad::Var loss = ad::squared_norm(ad::sub(out, tape.constant(target)));
        if (leaves != nullptr) *leaves = vars;
        return loss;
    };
    ad::Tape tape;
    std::vector<ad::Var> leaves;
    const ad::Var loss = loss_value(params, &leaves, tape);
    tape.backward(loss);
    const ad::Gradients fd = ad::finite_diff_grad(
        [&](const ad::ParamSet& ps) {
            ad::Tape t;
            return loss_value(ps, nullptr, t).value().re[0];
        },
        params, 1e-6);
    double worst = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        ComplexDense g = leaves[i].grad();
        if (params[i].real_only) std::fill(g.im.begin(), g.im.end(), 0.0);
        double scale_fd = 1e-8;
        for (std::size_t k = 0; k < g.size(); ++k) scale_fd = std::max({scale_fd, std::abs(fd[i].re[k]), std::abs(fd[i].im[k])});
        worst = std::max(worst, max_abs_diff(g, fd[i]) / scale_fd);
    }
    return worst;
}

ad::Param param(std::string name, ComplexDense v, bool real_only = false) { return {std::move(name), std::move(v), real_only}; }

Structure single_graph(const SparseReal& a) {
    return make_structure({std::make_shared<const SparseReal>(a)}, {0, a.rows});
}

}  // namespace

TEST_CASE("tape basics") {
    SUBCASE("loss equal to a parameter has gradient 1") {
        ad::Tape tape;
        const ad::Var p = tape.leaf(ComplexDense::from_real(1, 1, {2.5}));
        tape.backward(p);
        CHECK(p.grad().re[0] == 1.0);
        CHECK(p.grad().im[0] == 0.0);
    }
    SUBCASE("reused node accumulates additively") {
        ad::Tape tape;
        const ad::Var p = tape.leaf(ComplexDense::from_real(1, 1, {3.0}));
        const ad::Var loss = ad::add(ad::add(p, p), p);
        tape.backward(loss);
        CHECK(p.grad().re[0] == 3.0);
    }
    SUBCASE("constants receive no gradient") {
        ad::Tape tape;
        const ad::Var c = tape.constant(ComplexDense::from_real(1, 1, {1.0}));
        const ad::Var p = tape.leaf(ComplexDense::from_real(1, 1, {2.0}));
        tape.backward(ad::squared_norm(ad::matmul(c, p)));
        CHECK(c.grad().re[0] == 0.0);
        CHECK(p.grad().re[0] == doctest::Approx(4.0));
    }
    SUBCASE("non-scalar loss rejected") {
        ad::Tape tape;
        CHECK_THROWS_AS(tape.backward(tape.leaf(ComplexDense(2, 1))), ShapeError);
    }
}

TEST_CASE("finite_diff_grad") {
    const ad::ParamSet ps{param("p", ComplexDense::from_real(1, 1, {1.0}), true)};
    SUBCASE("linear f = 3p") {
        const auto g = ad::finite_diff_grad([](const ad::ParamSet& q) { return 3.0 * q[0].value.re[0]; }, ps);
        CHECK(std::abs(g[0].re[0] - 3.0) <= 1e-9);
    }
    SUBCASE("quadratic f = p^2 at p = 1") {
        const auto g = ad::finite_diff_grad(
            [](const ad::ParamSet& q) { return q[0].value.re[0] * q[0].value.re[0]; }, ps, 1e-5);
        CHECK(std::abs(g[0].re[0] - 2.0) <= 1e-9);
    }
    SUBCASE("real-only parameters have zero imaginary gradient") {
        const auto g = ad::finite_diff_grad([](const ad::ParamSet& q) { return q[0].value.im[0] * 5.0; }, ps);
        CHECK(g[0].im[0] == 0.0);
    }
    CHECK(ad::real_coordinate_count({param("a", ComplexDense(2, 2)), param("b", ComplexDense(1, 3), true)}) == 11);
}

TEST_CASE("primitive pullbacks match central differences") {
    const auto a6 = std::make_shared<const SparseReal>(normalize_adjacency(ring_graph(6).adjacency));
    const auto dir = std::make_shared<const SparseReal>(SparseReal::from_triplets(3, 3, {{0, 1, 1.0}, {1, 2, 0.5}, {2, 2, -1.0}}));
    const double tol = 1e-6;
    auto x = [](std::size_t r, std::size_t c, std::uint64_t s) { return param("x", random_complex(r, c, s)); };

    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::add(v[0], v[1]); }, {x(2, 3, 1), x(2, 3, 2)}, 3) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::sub(v[0], v[1]); }, {x(2, 3, 1), x(2, 3, 2)}, 3) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::scale(v[0], cplx{0.3, -1.2}); }, {x(3, 2, 4)}, 5) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::scale(v[0], -0.7); }, {x(3, 2, 4)}, 5) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::scale_by(v[0], v[1], cplx{0.0, 1.0}); },
                        {x(3, 2, 6), param("s", ComplexDense::from_real(1, 1, {0.4}), true)}, 7) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::matmul(v[0], v[1]); }, {x(3, 4, 8), x(4, 2, 9)}, 10) < tol);
    CHECK(op_grad_error([&](ad::Tape&, auto& v) { return ad::spmm(dir, v[0]); }, {x(3, 2, 11)}, 12) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::conj_transpose(v[0]); }, {x(3, 2, 13)}, 14) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::skew_hermitian_project(v[0]); }, {x(3, 3, 15)}, 16) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::groupsort(v[0]); }, {x(4, 4, 17)}, 18) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::gelu(v[0]); }, {x(4, 3, 19)}, 20) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::segment_mean(v[0], {0, 2, 5}); }, {x(5, 3, 21)}, 22) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::realify(v[0]); }, {x(3, 2, 23)}, 24) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::add_row_bias(v[0], v[1]); }, {x(3, 2, 25), x(1, 2, 26)}, 27) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::zero_pad(v[0], 5); }, {x(3, 2, 28)}, 29) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::squared_norm(v[0]); }, {x(3, 2, 30)}, 31) < tol);
    CHECK(op_grad_error([](ad::Tape&, auto& v) { return ad::mae_loss(v[0], {0.5, -2.0, 1.0}); }, {x(3, 1, 32)}, 33) < tol);
    CHECK(op_grad_error([&](ad::Tape&, auto& v) { return ad::expm_i_sym(a6, v[0], v[1], 8); },
                        {param("t", ComplexDense::from_real(1, 1, {0.8}), true), x(6, 2, 34)}, 35) < tol);
}

TEST_CASE("expm_i_sym equals the generic truncated series") {
    const auto a = std::make_shared<const SparseReal>(normalize_adjacency(random_connected_graph(9, 0.3, 2).adjacency));
    const ComplexDense x = random_complex(9, 3, 3);
    const ComplexDense g = random_complex(9, 3, 4);
    for (int order : {0, 1, 5, 12}) {
        CAPTURE(order);
        ad::Tape t1;
        const ad::Var tv1 = t1.leaf(ComplexDense::from_real(1, 1, {0.7}));
        const ad::Var x1 = t1.leaf(x);
        const ad::Var y1 = ad::expm_i_sym(a, tv1, x1, order);

        ad::Tape t2;
        const ad::Var tv2 = t2.leaf(ComplexDense::from_real(1, 1, {0.7}));
        const ad::Var x2 = t2.leaf(x);
        const ad::Var y2 = taylor_series(
            [&](ad::Var z) { return ad::scale_by(ad::spmm(a, z), tv2, cplx{0.0, 1.0}); }, x2, order);

        CHECK(max_abs_diff(y1.value(), y2.value()) < 1e-14);
        t1.backward(ad::squared_norm(ad::sub(y1, t1.constant(g))));
        t2.backward(ad::squared_norm(ad::sub(y2, t2.constant(g))));
        CHECK(max_abs_diff(x1.grad(), x2.grad()) < 1e-12);
        CHECK(std::abs(tv1.grad().re[0] - tv2.grad().re[0]) < 1e-11);
    }
}

TEST_CASE("t-gradient of a norm-preserving layer is at truncation level") {
    const SparseReal a = normalize_adjacency(ring_graph(8).adjacency);
    const auto ap = std::make_shared<const SparseReal>(a);
    const ComplexDense x = random_complex(8, 4, 5);
    const ComplexDense u = unitary_from_skew(random_complex(4, 4, 6));
    for (int k : {8, 12}) {
        ad::Tape tape;
        const ad::Var t = tape.leaf(ComplexDense::from_real(1, 1, {0.9}));
        const ad::Var y = ad::matmul(ad::expm_i_sym(ap, t, tape.constant(x), k), tape.constant(u));
        tape.backward(ad::squared_norm(y));
        const double nx = frobenius_norm(x);
        CHECK(std::abs(t.grad().re[0]) <= 2.0 * taylor_error_bound(0.9, nx * nx, k - 1));
    }
}

TEST_CASE("adam_step") {
    ad::ParamSet ps{param("w", random_complex(2, 2, 1)), param("r", ComplexDense::from_real(1, 2, {1.0, -1.0}), true)};
    const ad::AdamHyper hyper{0.01};
    SUBCASE("zero gradient leaves parameters unchanged") {
        const ad::ParamSet before = ps;
        ad::AdamState st = ad::adam_init(ps);
        ad::adam_step(ps, {ComplexDense(2, 2), ComplexDense(1, 2)}, st, hyper);
        CHECK(max_abs_diff(ps[0].value, before[0].value) == 0.0);
        CHECK(max_abs_diff(ps[1].value, before[1].value) == 0.0);
    }
    SUBCASE("unit gradient moves by -lr on the first step") {
        const ad::ParamSet before = ps;
        ad::AdamState st = ad::adam_init(ps);
        ComplexDense g(2, 2);
        std::fill(g.re.begin(), g.re.end(), 1.0);
        std::fill(g.im.begin(), g.im.end(), 1.0);
        ComplexDense gr(1, 2);
        std::fill(gr.re.begin(), gr.re.end(), 1.0);
        std::fill(gr.im.begin(), gr.im.end(), 1.0);
        ad::adam_step(ps, {g, gr}, st, hyper);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(ps[0].value.re[i] - before[0].value.re[i] == doctest::Approx(-0.01).epsilon(1e-6));
            CHECK(ps[0].value.im[i] - before[0].value.im[i] == doctest::Approx(-0.01).epsilon(1e-6));
        }
        CHECK(ps[1].value.im[0] == 0.0);
        CHECK(st.step == 1);
    }
    SUBCASE("bit-identical on identical inputs") {
        ad::ParamSet p1 = ps;
        ad::ParamSet p2 = ps;
        ad::AdamState s1 = ad::adam_init(p1);
        ad::AdamState s2 = ad::adam_init(p2);
        for (std::uint64_t k = 0; k < 5; ++k) {
            const ad::Gradients g{random_complex(2, 2, 10 + k), random_complex(1, 2, 20 + k)};
            ad::adam_step(p1, g, s1, hyper);
            ad::adam_step(p2, g, s2, hyper);
        }
        CHECK(p1[0].value.re == p2[0].value.re);
        CHECK(p1[0].value.im == p2[0].value.im);
    }
}

TEST_CASE("model configuration") {
    CHECK(default_config(LayerType::UniConv, 5, 8, 0).activation == Activation::GroupSort);
    CHECK(default_config(LayerType::Vanilla, 5, 8, 0).activation == Activation::Gelu);
    CHECK(lr_for_depth(5) == 7e-4);
    CHECK(lr_for_depth(10) == 3e-4);
    CHECK(lr_for_depth(20) == 1e-4);
    ModelConfig bad = default_config(LayerType::UniConv, 2, 5, 0);
    CHECK_THROWS_AS(validate_config(bad), InputError);
    CHECK(parse_layer_type(to_string(LayerType::LieUniConv)) == LayerType::LieUniConv);
    CHECK_THROWS_AS(parse_layer_type("bogus"), InputError);
    SUBCASE("unitary layers carry no bias parameters") {
        for (LayerType t : {LayerType::UniConv, LayerType::LieUniConv}) {
            for (const auto& p : init_params(default_config(t, 3, 4, 1))) {
                if (p.name.rfind("layer", 0) == 0) CHECK(p.name.find(".b") == std::string::npos);
            }
        }
    }
}

TEST_CASE("model_forward") {
    const SparseReal a = normalize_adjacency(ring_graph(6).adjacency);
    const ComplexDense x = random_real(6, 1, 7);
    SUBCASE("zero output head gives prediction 0") {
        for (LayerType t : {LayerType::UniConv, LayerType::LieUniConv, LayerType::Vanilla, LayerType::VanillaResidual}) {
            const ModelConfig c = default_config(t, 2, 4, 3);
            ad::ParamSet ps = init_params(c);
            for (auto& p : ps) {
                if (p.name == "head.W2" || p.name == "head.b2") p.value = ComplexDense(p.value.rows, p.value.cols);
            }
            CHECK(predict(c, ps, single_graph(a), x).front() == 0.0);
        }
    }
    SUBCASE("node permutation leaves the prediction unchanged") {
        const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
        std::vector<SparseReal::Triplet> trips;
        for (std::size_t r = 0; r < 6; ++r) {
            for (std::size_t k = a.row_ptr[r]; k < a.row_ptr[r + 1]; ++k) trips.push_back({perm[r], perm[a.col_idx[k]], a.values[k]});
        }
        const SparseReal pa = SparseReal::from_triplets(6, 6, trips);
        ComplexDense px(6, 1);
        for (std::size_t r = 0; r < 6; ++r) px.re[perm[r]] = x.re[r];
        for (LayerType t : {LayerType::UniConv, LayerType::LieUniConv, LayerType::Vanilla, LayerType::VanillaResidual}) {
            const ModelConfig c = default_config(t, 3, 4, 5);
            const ad::ParamSet ps = init_params(c);
            CHECK(predict(c, ps, single_graph(pa), px).front() ==
                  doctest::Approx(predict(c, ps, single_graph(a), x).front()).epsilon(1e-12));
        }
    }
    SUBCASE("single node with identity layers reduces to head(embed(x))") {
        ModelConfig c = default_config(LayerType::LieUniConv, 2, 4, 9);
        c.activation = Activation::Gelu;
        ad::ParamSet ps = init_params(c);
        for (auto& p : ps) {
            if (p.name.rfind("layer", 0) == 0) p.value = ComplexDense(4, 4);  // W = 0 makes each conv the identity
            if (p.name == "head.b1") p.value = random_real(1, c.head_width, 10);
        }
        const ComplexDense x1 = ComplexDense::from_real(1, 1, {0.8});
        auto gelu = [](double v) { return 0.5 * v * (1.0 + std::erf(v / std::numbers::sqrt2)); };
        std::vector<double> h(4);
        for (std::size_t j = 0; j < 4; ++j) h[j] = gelu(gelu(0.8 * ps[0].value.re[j]));
        const ComplexDense& w1 = ps[ps.size() - 4].value;
        const ComplexDense& b1 = ps[ps.size() - 3].value;
        const ComplexDense& w2 = ps[ps.size() - 2].value;
        const double b2 = ps.back().value.re[0];
        double out = b2;
        for (std::size_t k = 0; k < c.head_width; ++k) {
            double z = b1.re[k];
            for (std::size_t j = 0; j < 4; ++j) z += h[j] * w1.re[j * c.head_width + k];  // imaginary half is zero
            out += gelu(z) * w2.re[k];
        }
        CHECK(predict(c, ps, single_graph(SparseReal(1, 1)), x1).front() == doctest::Approx(out).epsilon(1e-13));
    }
    SUBCASE("wrong operator count") {
        ModelConfig c = default_config(LayerType::UniConv, 1, 4, 0);
        c.op_symmetric = {true, true};
        CHECK_THROWS_AS(predict(c, init_params(c), single_graph(a), x), ShapeError);
    }
}

TEST_CASE("gradient check for every layer type") {
    for (LayerType t : {LayerType::UniConv, LayerType::LieUniConv, LayerType::Vanilla, LayerType::VanillaResidual}) {
        for (bool unitary_map : {false, true}) {
            if (unitary_map && t != LayerType::UniConv) continue;
            for (const auto& e : gradient_check(gradient_check_config(t, unitary_map), 21)) {
                CAPTURE(to_string(t));
                CAPTURE(e.param);
                CHECK(e.rel_error <= 1e-4);
            }
        }
    }
}

TEST_CASE("dihedral operators: model gradients with a non-symmetric operator") {
    const GroupDataset gds = dihedral_distance_dataset(4, 8, 1);
    const TrainSet set = make_train_set(gds);
    CHECK(set.op_symmetric == std::vector<bool>{true, false});
    Batch b = make_batch(set, {0, 1});
    // generic point: no GroupSort pair tied, no prediction at its target
    b.features = random_complex(b.features.rows, 1, 5);
    for (LayerType t : {LayerType::LieUniConv, LayerType::Vanilla}) {
        ModelConfig c = default_config(t, 2, 4, 3);
        c.op_symmetric = set.op_symmetric;
        c.taylor_K = 8;
        ad::ParamSet ps = init_params(c);
        std::uint64_t jitter_seed = 6;
        for (auto& p : ps) {
            const ComplexDense j = random_complex(p.value.rows, p.value.cols, jitter_seed++, 0.1);
            p.value = add(p.value, p.real_only ? ComplexDense::from_real(j.rows, j.cols, j.re) : j);
        }
        const LossAndGrad lg = mae_loss_and_grad(c, ps, b.structure, b.features, b.targets);
        const ad::Gradients fd = ad::finite_diff_grad(
            [&](const ad::ParamSet& q) {
                const auto pr = predict(c, q, b.structure, b.features);
                double s = 0.0;
                for (std::size_t i = 0; i < pr.size(); ++i) s += std::abs(pr[i] - b.targets[i]);
                return s / static_cast<double>(pr.size());
            },
            ps, 1e-6);
        for (std::size_t i = 0; i < ps.size(); ++i) {
            double scale_fd = 1e-8;
            for (std::size_t k = 0; k < fd[i].size(); ++k) scale_fd = std::max({scale_fd, std::abs(fd[i].re[k]), std::abs(fd[i].im[k])});
            CAPTURE(ps[i].name);
            CHECK(max_abs_diff(lg.grads[i], fd[i]) / scale_fd <= 1e-4);
        }
    }
}

TEST_CASE("dihedral operators commute with right translation") {
    const GroupDataset gds = dihedral_distance_dataset(5, 4, 2);
    const TrainSet set = make_train_set(gds);
    const FiniteGroup& g = gds.group;
    for (std::size_t h = 0; h < g.order; ++h) {
        const SparseReal r = permutation_matrix(regular_right_action(g, h));
        for (const auto& op : set.samples[0].ops) {
            const ComplexDense x = random_complex(g.order, 1, h);
            CHECK(max_abs_diff(spmm(*op, spmm(r, x)), spmm(r, spmm(*op, x))) < 1e-15);
        }
    }
}

TEST_CASE("training loop") {
    const TrainSet set = make_train_set(ring_distance_dataset(8, 64, 3));
    const ModelConfig c = default_config(LayerType::UniConv, 2, 4, 2);
    SUBCASE("zero epochs keeps the initial parameters") {
        TrainOptions opt;
        opt.epochs = 0;
        const TrainResult r = train(c, set, opt);
        CHECK(r.history.epochs.empty());
        const ad::ParamSet init = init_params(c);
        for (std::size_t i = 0; i < init.size(); ++i) CHECK(max_abs_diff(r.params[i].value, init[i].value) == 0.0);
    }
    SUBCASE("history length equals the epoch count and runs are deterministic") {
        TrainOptions opt;
        opt.epochs = 3;
        opt.shuffle_seed = 4;
        const TrainResult r1 = train(c, set, opt);
        const TrainResult r2 = train(c, set, opt);
        REQUIRE(r1.history.epochs.size() == 3);
        for (std::size_t e = 0; e < 3; ++e) {
            CHECK(r1.history.epochs[e].train_mae == r2.history.epochs[e].train_mae);
            CHECK(r1.history.epochs[e].val_mae == r2.history.epochs[e].val_mae);
            CHECK(r1.history.epochs[e].test_mae == r2.history.epochs[e].test_mae);
        }
        for (std::size_t i = 0; i < r1.params.size(); ++i) CHECK(r1.params[i].value.re == r2.params[i].value.re);
    }
    SUBCASE("early stop threshold") {
        TrainOptions opt;
        opt.epochs = 5;
        opt.stop_train_mae = 1e9;
        CHECK(train(c, set, opt).history.epochs.size() == 1);
    }
    SUBCASE("strictly unitary configs stay isometric during training") {
        ModelConfig u = c;
        u.unitary_feature_map = true;
        ModelConfig lie = default_config(LayerType::LieUniConv, 2, 4, 2);
        for (const ModelConfig& cfg : {u, lie}) {
            TrainOptions opt;
            opt.epochs = 3;
            opt.lr = 1e-2;
            opt.check_isometry = true;
            const TrainResult r = train(cfg, set, opt);
            CHECK(r.max_isometry_drift <= 1e-5);
        }
    }
    SUBCASE("trivial predictor") {
        const double m = trivial_mae(set, set.split.test);
        double mean = 0.0;
        for (std::size_t i : set.split.train) mean += set.samples[i].target;
        mean /= static_cast<double>(set.split.train.size());
        double expected = 0.0;
        for (std::size_t i : set.split.test) expected += std::abs(set.samples[i].target - mean);
        CHECK(m == doctest::Approx(expected / static_cast<double>(set.split.test.size())).epsilon(1e-14));
    }
}
