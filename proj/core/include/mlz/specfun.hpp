#pragma once

#include <complex>

#include "mlz/errors.hpp"
#include "mlz/model.hpp"

namespace mlz {

using Complex = std::complex<double>;

/// Fresnel cosine integral C(x) = int_0^x cos(pi t^2 / 2) dt, x >= 0.
/// Absolute accuracy better than 1e-12 everywhere (hybrid power series /
/// panel quadrature / asymptotic expansion).
double fresnel_c(double x);

/// Fresnel sine integral S(x) = int_0^x sin(pi t^2 / 2) dt, x >= 0.
double fresnel_s(double x);

/// C(x) + i S(x) in one evaluation.
Complex fresnel_cs(double x);

/// int_0^s exp(i mu v^2) dv for real mu != 0, s >= 0, via the Fresnel
/// closed form sqrt(pi/(2|mu|)) [C(xi) + i sgn(mu) S(xi)], xi = sqrt(2|mu|/pi) s.
Complex fresnel_phase_integral(double mu, double s);

/// sqrt(-i b) for real b != 0 with the branch cut of the square root taken
/// slightly below the negative real axis: sqrt(|b|) * exp(-i pi sgn(b) / 4).
/// Squaring the result recovers -i b up to rounding.
Complex branch_sqrt(double b);

/// Principal-branch complex inverse tangent. Branch cuts run along the
/// imaginary axis outside the unit segment. A point exactly on a cut takes
/// the counterclockwise-continuous boundary value: the upper cut is
/// continuous with the first quadrant, the lower cut with the third, so
/// Re Arctan(iy) = +pi/2 for y > 1 and -pi/2 for y < -1.
/// Throws BranchPointError at z = +-i.
Complex principal_arctan(Complex z);

/// Parameter triple of the oscillatory integral
///   Q = int_0^inf ds e^{i alpha s^2} (int_0^s e^{i beta s1^2} ds1)
///                                    (int_0^s e^{i gamma s2^2} ds2).
/// In the series application alpha = b_lp/2, beta = b_jl/2, gamma = b_pk/2,
/// and alpha + beta + gamma > 0 always holds for j < k. The integral
/// diverges iff alpha + beta = 0 or alpha + gamma = 0 (the resonance
/// condition), in which case `resonant` is set.
struct QTriple {
    QTriple(double alpha, double beta, double gamma);

    double alpha;
    double beta;
    double gamma;
    bool resonant;
};

/// Closed form of Q for an off-resonant triple:
///   Q = sqrt(pi) / (4 sqrt(-i a) sqrt(-i b) sqrt(-i c))
///       * [ theta(-a) theta(a+b) theta(a+c) pi
///           + Arctan( sqrt(-i b) sqrt(-i c) / (sqrt(-i a) sqrt(-i(a+b+c))) ) ].
/// Throws ResonantInputError when the triple is resonant.
Complex q_closed_form(const QTriple& t);

/// Direct numerical evaluation of Q to absolute accuracy ~tol: inner
/// integrals via the Fresnel closed form, outer integral on panels uniform
/// in u = s^2, oscillatory tail removed by a Hann-windowed average of the
/// partial integrals over geometrically growing windows.
/// Throws ResonantInputError on resonant input and ConvergenceFailure if the
/// window extrapolation does not stabilize within the panel budget.
Complex q_quadrature(const QTriple& t, double tol);

/// The finite resonant-limit combination R for a resonant index quadruple
/// (0-based, j < k, and p == j or l == k):
///   R = sgn(b_lk) lambda_jk^2 lambda_jl^2   for p == j, l != k,
///   R = sgn(b_jp) lambda_jk^2 lambda_pk^2   for l == k, p != j,
///   R = 0                                   for p == j and l == k.
/// `slopes` must belong to the (descending) model the lambda matrix came
/// from. Throws NotResonantError if neither p == j nor l == k.
double resonant_r(const LambdaMatrix& lambda, const std::vector<double>& slopes,
                  int j, int k, int l, int p);

}  // namespace mlz
