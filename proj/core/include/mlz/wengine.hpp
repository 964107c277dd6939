#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "mlz/model.hpp"
#include "mlz/specfun.hpp"

namespace mlz {

/// One term W_n(t) of the expansion W(t) = sum_n W_n(t) g^n obtained from the
/// anticommutator recursion W_{n+1}(t) = -i int_0^t {A~(s), W_n(s)} ds.
/// W_n is Hermitian for even n and anti-Hermitian for odd n (within
/// quadrature tolerance for the numerically integrated orders).
struct WMatrix {
    int n = 0;
    int order = 0;
    double t = 0.0;  // +infinity for closed-form limits
    Eigen::MatrixXcd values;
};

/// int_0^t A~(s) ds entrywise via the Fresnel closed form; the only integral
/// W_1 and W_2 need.
Eigen::MatrixXcd atilde_integral(const Model& model, double t);

/// A~(t) = e^{i Phi} A e^{-i Phi}, entries A_jk e^{i (b_j - b_k) t^2 / 2}.
Eigen::MatrixXcd atilde(const Model& model, double t);

/// W_1(infinity): zero diagonal, -i sqrt(2) lambda_jk e^{i pi sgn(b_jk)/4}
/// off the diagonal (e^{i pi/4} for j < k in descending order).
WMatrix w1_infinity(const LambdaMatrix& lambda, const std::vector<double>& slopes);

/// W_2(infinity): diagonal -sum_l lambda_jl^2; off-diagonal the
/// exterior-sum real part and interior-sum imaginary part picked out by the
/// slope-difference signs.
WMatrix w2_infinity(const LambdaMatrix& lambda, const std::vector<double>& slopes);

/// W_n(t) for n in {1,2,3}. Orders 1 and 2 reduce to the single integral
/// above; order 3 adds the irreducible double integral
/// int_0^t I(s) A~(s) I(s) ds, evaluated on panels uniform in s^2 and
/// refined until successive values differ by less than tol per entry.
/// Throws ConvergenceFailure if refinement stalls.
WMatrix w_n_finite(const Model& model, int order, double t, double tol);

/// Order-n probability coefficient matrix at finite time,
/// P_{n,jk}(t) = sum_m W_{m,jk}(t) W*_{n-m,jk}(t). Order 4 needs W_4 only on
/// the diagonal, which is recovered from double stochasticity instead of a
/// four-fold integral.
Eigen::MatrixXd pn_finite(const Model& model, int order, double t, double tol);

/// Evaluates the resonant combination
///   R(t) = [ -2i int_0^t A~_jk ]* [ -2i int_0^t A~_lp(s) I_jl(s) I_pk(s) ds ] + c.c.
/// on the given increasing time grid and returns its extrapolated t -> inf
/// limit (Hann-windowed averages in u = t^2 plus 1/u Richardson). This is the
/// finite-time oracle for resonant_r. Indices are 0-based with j < k and the
/// resonance condition p == j or l == k.
/// Throws NotResonantError on a non-resonant quadruple and NoConvergence if
/// the oscillation amplitude of R(t) fails to decay along the grid.
double resonant_limit_check(const Model& model, int j, int k, int l, int p,
                            const std::vector<double>& t_grid);

inline constexpr double kInfiniteTime = std::numeric_limits<double>::infinity();

}  // namespace mlz
