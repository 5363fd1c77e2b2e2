#include "uconv/expmap.hpp"

#include <cmath>

namespace uconv {

ComplexDense exp_action_taylor(const OperatorAction& action, const ComplexDense& x, int order) {
    if (order < 0) throw InputError("exp_action_taylor: order must be non-negative");
    return taylor_series(action, x, order);
}

double taylor_error_bound(double norm_l, double norm_x, int order) {
    if (norm_l < 0.0 || norm_x < 0.0) throw InputError("taylor_error_bound: norms must be non-negative");
    if (order < 0) throw InputError("taylor_error_bound: order must be non-negative");
    if (norm_l == 0.0 || norm_x == 0.0) return 0.0;
    const double k1 = static_cast<double>(order + 1);
    const double log_bound = k1 * std::log(norm_l) + std::log(norm_x) + norm_l - std::lgamma(k1 + 1.0);
    return std::exp(log_bound);
}

int taylor_order_for(double norm_l, double tol, int max_order) {
    for (int k = 0; k <= max_order; ++k) {
        if (taylor_error_bound(norm_l, 1.0, k) <= tol) return k;
    }
    throw NumericError("taylor_order_for: no order up to " + std::to_string(max_order) + " reaches tolerance");
}

ComplexDense expm_taylor(const ComplexDense& m, int order) {
    if (m.rows != m.cols) throw ShapeError("expm_taylor: matrix is not square");
    auto left = [&m](const ComplexDense& y) { return matmul(m, y); };
    return taylor_series(left, ComplexDense::identity(m.rows), order);
}

ComplexDense unitary_from_skew(const ComplexDense& b, double tol) {
    const ComplexDense w = skew_hermitian_project(b);
    const int order = taylor_order_for(frobenius_norm(w), tol);
    return expm_taylor(w, order);
}

ComplexDense cayley_map(const ComplexDense& m) {
    if (m.rows != m.cols) throw ShapeError("cayley_map: matrix is not square");
    const auto eye = ComplexDense::identity(m.rows);
    const auto half = scale(m, 0.5);
    // (I + M/2) and (I - M/2)^{-1} commute, so a left solve suffices.
    return lu_solve(sub(eye, half), add(eye, half));
}

}  // namespace uconv
