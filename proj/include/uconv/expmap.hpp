#pragma once

#include <functional>

#include "uconv/numerics.hpp"

namespace uconv {

/// Default truncation order for the exponential series.
inline constexpr int kDefaultTaylorOrder = 12;

/// A linear map on feature matrices together with an upper bound on its
/// operator norm.
struct OperatorAction {
    std::function<ComplexDense(const ComplexDense&)> apply;
    double norm_bound = 0.0;

    ComplexDense operator()(const ComplexDense& x) const { return apply(x); }
};

/// sum_{k=0}^{K} L^k(x) / k!, accumulated as term <- L(term) / k.
///
/// Generic over the value type so the same loop runs on plain matrices and on
/// autodiff variables; T needs `add(T, T)` and `scale(T, double)` found by ADL.
template <class T, class Action>
T taylor_series(const Action& action, const T& x, int order) {
    T sum = x;
    T term = x;
    for (int k = 1; k <= order; ++k) {
        term = scale(action(term), 1.0 / static_cast<double>(k));
        sum = add(sum, term);
    }
    return sum;
}

ComplexDense exp_action_taylor(const OperatorAction& action, const ComplexDense& x, int order = kDefaultTaylorOrder);

/// norm_L^{K+1} * norm_X * e^{norm_L} / (K+1)!, a majorant of the truncation
/// remainder of the order-K series.
double taylor_error_bound(double norm_l, double norm_x, int order);

/// Smallest order whose remainder majorant (unit input) is at most `tol`.
int taylor_order_for(double norm_l, double tol, int max_order = 200);

/// exp(M) by the truncated series applied to the identity.
ComplexDense expm_taylor(const ComplexDense& m, int order);

/// exp of the skew-Hermitian part of B, with the order picked so the remainder
/// majorant is below `tol`. Used to materialize unitary feature maps.
ComplexDense unitary_from_skew(const ComplexDense& b, double tol = 1e-15);

/// (I + M/2)(I - M/2)^{-1}. Throws NumericError if I - M/2 is singular.
ComplexDense cayley_map(const ComplexDense& m);

}  // namespace uconv
