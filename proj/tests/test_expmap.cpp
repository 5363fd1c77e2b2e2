#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "support.hpp"
#include "uconv/expmap.hpp"
#include "uconv/graphs.hpp"

using namespace uconv;
using namespace testing_support;

namespace {

OperatorAction sparse_action(const SparseReal& a, cplx coeff, double norm) {
    return {[&a, coeff](const ComplexDense& x) { return scale(spmm(a, x), coeff); }, norm};
}

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

}  // namespace

TEST_CASE("exp_action_taylor") {
    const ComplexDense x = random_complex(2, 3, 1);
    SUBCASE("zero action returns X for every order") {
        const OperatorAction zero{[](const ComplexDense& v) { return ComplexDense(v.rows, v.cols); }, 0.0};
        for (int k : {0, 1, 5, 12}) CHECK(max_abs_diff(exp_action_taylor(zero, x, k), x) == 0.0);
    }
    SUBCASE("nilpotent action terminates after one term") {
        const SparseReal n = SparseReal::from_triplets(2, 2, {{0, 1, 1.0}});
        const OperatorAction act = sparse_action(n, 1.0, 1.0);
        const ComplexDense expected = add(x, spmm(n, x));
        for (int k : {1, 2, 12}) CHECK(max_abs_diff(exp_action_taylor(act, x, k), expected) < 1e-15);
    }
    SUBCASE("closed form on the 2-node path: exp(iA)X = cos(1)X + i sin(1)AX") {
        const SparseReal a = normalize_adjacency(path_graph(2).adjacency);
        const ComplexDense expected =
            add(scale(x, std::cos(1.0)), scale(spmm(a, x), cplx{0.0, std::sin(1.0)}));
        CHECK(max_abs_diff(exp_action_taylor(sparse_action(a, cplx{0.0, 1.0}, 1.0), x, 30), expected) <= 1e-12);
        for (std::uint64_t s = 0; s < 20; ++s) {
            const double t = -1.0 + 0.1 * static_cast<double>(s);
            const ComplexDense xs = random_complex(2, 2, 40 + s);
            const ComplexDense ex =
                add(scale(xs, std::cos(t)), scale(spmm(a, xs), cplx{0.0, std::sin(t)}));
            CHECK(max_abs_diff(exp_action_taylor(sparse_action(a, cplx{0.0, t}, std::abs(t)), xs, 30), ex) <= 1e-12);
        }
    }
    SUBCASE("agrees with a dense scaling-and-squaring exponential") {
        const Graph g = random_connected_graph(7, 0.4, 3);
        const SparseReal a = normalize_adjacency(g.adjacency);
        Dense ia = to_dense(a);
        for (auto& row : ia) {
            for (auto& v : row) v *= cplx{0.0, 0.6};
        }
        const ComplexDense xs = random_complex(7, 2, 5);
        const Dense expected = naive_mul(dense_expm(ia), to_dense(xs));
        const ComplexDense got = exp_action_taylor(sparse_action(a, cplx{0.0, 0.6}, 0.6), xs, 20);
        CHECK(max_diff(to_dense(got), expected) < 1e-12);
    }
}

TEST_CASE("taylor_error_bound") {
    CHECK(taylor_error_bound(0.0, 1.0, 5) == 0.0);
    SUBCASE("norm 1, K = 10 gives e / 11!") {
        const double expected = std::exp(1.0) / factorial(11);
        CHECK(taylor_error_bound(1.0, 1.0, 10) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(taylor_error_bound(1.0, 1.0, 10) <= 6.9e-8);
    }
    SUBCASE("monotone decreasing in K for norm at most 1") {
        for (double nl : {0.1, 0.5, 1.0}) {
            for (int k = 0; k < 30; ++k) CHECK(taylor_error_bound(nl, 1.0, k + 1) < taylor_error_bound(nl, 1.0, k));
        }
    }
    SUBCASE("linear in the input norm") {
        CHECK(taylor_error_bound(0.7, 3.0, 6) == doctest::Approx(3.0 * taylor_error_bound(0.7, 1.0, 6)));
    }
    SUBCASE("taylor_order_for meets its tolerance minimally") {
        const int k = taylor_order_for(1.0, 1e-12);
        CHECK(taylor_error_bound(1.0, 1.0, k) <= 1e-12);
        CHECK(taylor_error_bound(1.0, 1.0, k - 1) > 1e-12);
    }
}

TEST_CASE("isometry of the truncated series is within twice the bound") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        const std::size_t n = 4 + s % 20;
        const SparseReal a = normalize_adjacency(random_connected_graph(n, 0.3, 900 + s).adjacency);
        const double t = -1.0 + 2.0 * static_cast<double>(s) / 49.0;
        const ComplexDense x = random_complex(n, 3, 1000 + s);
        for (int k : {4, 8, 12}) {
            const ComplexDense y = exp_action_taylor(sparse_action(a, cplx{0.0, t}, std::abs(t)), x, k);
            const double drift = std::abs(frobenius_norm(y) - frobenius_norm(x));
            CHECK(drift <= 2.0 * taylor_error_bound(std::abs(t), frobenius_norm(x), k) + 1e-13);
        }
    }
}

TEST_CASE("expm_taylor and unitary_from_skew") {
    const ComplexDense w = skew_hermitian_project(random_complex(5, 5, 7));
    const ComplexDense scaled = scale(w, 0.5 / frobenius_norm(w));
    CHECK(max_diff(to_dense(expm_taylor(scaled, 25)), dense_expm(to_dense(scaled))) < 1e-13);

    const ComplexDense u = unitary_from_skew(random_complex(6, 6, 8));
    CHECK(max_abs_diff(matmul(conj_transpose(u), u), ComplexDense::identity(6)) < 1e-12);
    CHECK(max_abs_diff(expm_taylor(ComplexDense(3, 3), 12), ComplexDense::identity(3)) == 0.0);
}

TEST_CASE("cayley_map") {
    SUBCASE("zero maps to identity") { CHECK(max_abs_diff(cayley_map(ComplexDense(3, 3)), ComplexDense::identity(3)) < 1e-15); }
    SUBCASE("2x2 rotation by 2 arctan(theta / 2)") {
        const double theta = 1.0;
        const ComplexDense m = ComplexDense::from_real(2, 2, {0.0, theta, -theta, 0.0});
        const double phi = 2.0 * std::atan(theta / 2.0);
        // (I + M/2)(I - M/2)^{-1} for this M rotates by -phi in the standard orientation.
        const ComplexDense expected =
            ComplexDense::from_real(2, 2, {std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi)});
        CHECK(max_abs_diff(cayley_map(m), expected) < 1e-14);
    }
    SUBCASE("random skew-Hermitian input gives a unitary") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const ComplexDense u = cayley_map(skew_hermitian_project(random_complex(4, 4, 60 + s, 2.0)));
            CHECK(frobenius_norm(sub(matmul(conj_transpose(u), u), ComplexDense::identity(4))) <= 1e-10);
        }
    }
    SUBCASE("property: cayley(-M) cayley(M) = I") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const ComplexDense m = skew_hermitian_project(random_complex(5, 5, 80 + s));
            CHECK(max_abs_diff(matmul(cayley_map(scale(m, -1.0)), cayley_map(m)), ComplexDense::identity(5)) <=
                  1e-10);
        }
    }
    SUBCASE("singular denominator") {
        // I - M/2 = 0 for M = 2I
        CHECK_THROWS_AS(cayley_map(scale(ComplexDense::identity(2), 2.0)), NumericError);
    }
}
