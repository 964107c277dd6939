#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "mlz/specfun.hpp"
#include "test_util.hpp"

using mlz::Complex;
using doctest::Approx;

namespace {

Complex fresnel_oracle(double x) {
    // independent route: adaptive Simpson on the defining integral
    const double c = testutil::adaptive_simpson(
        [](double t) { return std::cos(0.5 * M_PI * t * t); }, 0.0, x, 1e-14);
    const double s = testutil::adaptive_simpson(
        [](double t) { return std::sin(0.5 * M_PI * t * t); }, 0.0, x, 1e-14);
    return {c, s};
}

}  // namespace

TEST_CASE("fresnel integrals against the quadrature oracle") {
    CHECK(mlz::fresnel_c(0.0) == 0.0);
    CHECK(mlz::fresnel_s(0.0) == 0.0);
    // spans the series / panel / asymptotic regimes and their seams
    for (double x : {0.05, 0.3, 0.7, 1.0, 1.5, 1.95, 2.0, 2.05, 2.7, 3.3,
                     4.0, 4.35, 4.4, 4.45, 5.5, 7.0, 9.5, 14.0}) {
        const Complex want = fresnel_oracle(x);
        CHECK(std::abs(mlz::fresnel_c(x) - want.real()) <= 1e-12);
        CHECK(std::abs(mlz::fresnel_s(x) - want.imag()) <= 1e-12);
    }
    // frozen value, C(1) (cross-checked against the oracle just above)
    CHECK(mlz::fresnel_c(1.0) == Approx(0.7798934003768228).epsilon(1e-12));
    CHECK(mlz::fresnel_s(1.0) == Approx(0.4382591473903548).epsilon(1e-12));
}

TEST_CASE("fresnel asymptotes and domain") {
    // C, S -> 1/2 with tails bounded by 1/(pi x)
    for (double x : {6.0, 12.0, 30.0, 120.0}) {
        CHECK(std::abs(mlz::fresnel_c(x) - 0.5) <= 1.0 / (M_PI * x) + 1e-12);
        CHECK(std::abs(mlz::fresnel_s(x) - 0.5) <= 1.0 / (M_PI * x) + 1e-12);
    }
    CHECK_THROWS_AS((void)mlz::fresnel_c(-0.1), mlz::DomainError);
    CHECK_THROWS_AS((void)mlz::fresnel_s(-2.0), mlz::DomainError);
}

TEST_CASE("fresnel_phase_integral matches direct quadrature") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> mu_d(0.2, 4.0);
    std::uniform_real_distribution<double> s_d(0.1, 6.0);
    for (int i = 0; i < 20; ++i) {
        const double mu = (i % 2 ? 1.0 : -1.0) * mu_d(rng);
        const double s = s_d(rng);
        const Complex want = testutil::adaptive_simpson(
            [mu](double v) {
                return std::exp(Complex(0.0, mu * v * v));
            },
            0.0, s, 1e-14);
        CHECK(std::abs(mlz::fresnel_phase_integral(mu, s) - want) <= 1e-12);
    }
}

TEST_CASE("branch_sqrt convention and square property") {
    const double r2 = M_SQRT1_2;
    CHECK(std::abs(mlz::branch_sqrt(1.0) - Complex(r2, -r2)) <= 1e-16);
    CHECK(std::abs(mlz::branch_sqrt(-1.0) - Complex(r2, r2)) <= 1e-16);
    CHECK(std::abs(mlz::branch_sqrt(4.0) - 2.0 * Complex(r2, -r2)) <= 1e-15);
    CHECK_THROWS_AS((void)mlz::branch_sqrt(0.0), mlz::DomainError);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> mag(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double b = std::copysign(std::pow(10.0, mag(rng)), mag(rng));
        const Complex sq = mlz::branch_sqrt(b);
        const Complex target(0.0, -b);
        CHECK(std::abs(sq * sq - target) <= 2.0 * 2.2204460492503131e-16 * std::abs(b));
    }
}

TEST_CASE("principal arctangent: real axis and interior of the imaginary axis") {
    CHECK(mlz::principal_arctan({0.0, 0.0}) == Complex(0.0, 0.0));
    CHECK(std::abs(mlz::principal_arctan({1.0, 0.0}) - Complex(M_PI / 4, 0.0)) <=
          1e-15);
    for (double x : {-25.0, -3.0, -0.7, -0.02, 0.02, 0.7, 3.0, 25.0}) {
        CHECK(std::abs(mlz::principal_arctan({x, 0.0}).real() - std::atan(x)) <=
              1e-14);
        CHECK(mlz::principal_arctan({x, 0.0}).imag() == Approx(0.0).epsilon(1e-14));
    }
    // |y| < 1 on the axis: purely imaginary, i artanh(y)
    for (double y : {-0.9, -0.3, 0.4, 0.95}) {
        const Complex v = mlz::principal_arctan({0.0, y});
        CHECK(v.real() == 0.0);
        CHECK(v.imag() == Approx(std::atanh(y)).epsilon(1e-14));
    }
}

TEST_CASE("principal arctangent: cut values and the boundary rule") {
    // frozen: Arctan(2i) = pi/2 + (i/2) ln 3
    const Complex at2i = mlz::principal_arctan({0.0, 2.0});
    CHECK(at2i.real() == Approx(M_PI / 2).epsilon(1e-15));
    CHECK(at2i.imag() == Approx(0.5493061443340548).epsilon(1e-14));

    // case formula: Re Arctan(ix) = (pi/2) sgn(x) for |x| > 1, 0 for |x| < 1
    for (double x : {1.01, 2.0, 10.0}) {
        CHECK(mlz::principal_arctan({0.0, x}).real() == Approx(M_PI / 2));
        CHECK(mlz::principal_arctan({0.0, -x}).real() == Approx(-M_PI / 2));
    }
    for (double x : {0.2, 0.99}) {
        CHECK(mlz::principal_arctan({0.0, x}).real() == 0.0);
        CHECK(mlz::principal_arctan({0.0, -x}).real() == 0.0);
    }

    // the upper cut is continuous with the first quadrant, the lower cut with
    // the third (counterclockwise-approach convention); the opposite side
    // jumps by pi
    for (double y : {1.3, 2.0, 7.0}) {
        const Complex on_cut = mlz::principal_arctan({0.0, y});
        const Complex right = mlz::principal_arctan({1e-9, y});
        const Complex left = mlz::principal_arctan({-1e-9, y});
        CHECK(std::abs(on_cut - right) <= 1e-8);
        CHECK(std::abs(left.real() - (on_cut.real() - M_PI)) <= 1e-8);

        const Complex lower = mlz::principal_arctan({0.0, -y});
        const Complex third = mlz::principal_arctan({-1e-9, -y});
        const Complex fourth = mlz::principal_arctan({1e-9, -y});
        CHECK(std::abs(lower - third) <= 1e-8);
        CHECK(std::abs(fourth.real() - (lower.real() + M_PI)) <= 1e-8);
    }

    CHECK_THROWS_AS((void)mlz::principal_arctan({0.0, 1.0}), mlz::BranchPointError);
    CHECK_THROWS_AS((void)mlz::principal_arctan({0.0, -1.0}),
                    mlz::BranchPointError);
}

TEST_CASE("QTriple validation and resonance flag") {
    CHECK_THROWS_AS(mlz::QTriple(0.0, 1.0, 1.0), mlz::DomainError);
    CHECK_THROWS_AS(mlz::QTriple(1.0, -0.5, -0.6), mlz::DomainError);  // sum < 0
    CHECK(mlz::QTriple(1.0, -1.0, 3.0).resonant);   // alpha + beta = 0
    CHECK(mlz::QTriple(-2.0, 5.0, 2.0).resonant);   // alpha + gamma = 0
    CHECK_FALSE(mlz::QTriple(1.0, 2.0, 3.0).resonant);
}

TEST_CASE("Q closed form: symmetric triple has an elementary value") {
    for (double a : {0.5, 1.0, 2.3}) {
        const Complex q = mlz::q_closed_form(mlz::QTriple(a, a, a));
        const Complex want = std::pow(M_PI, 1.5) / 24.0 *
                             std::exp(Complex(0.0, 3.0 * M_PI / 4.0)) *
                             std::pow(a, -1.5);
        CHECK(std::abs(q - want) <= 1e-14 * std::abs(want));
    }
    CHECK_THROWS_AS((void)mlz::q_closed_form(mlz::QTriple(1.0, -1.0, 3.0)),
                    mlz::ResonantInputError);
    CHECK_THROWS_AS((void)mlz::q_quadrature(mlz::QTriple(1.0, -1.0, 3.0), 1e-6),
                    mlz::ResonantInputError);
}

TEST_CASE("Q closed form vs quadrature: specific cases") {
    // all-positive
    {
        const mlz::QTriple t(1.0, 1.0, 1.0);
        CHECK(std::abs(mlz::q_closed_form(t) - mlz::q_quadrature(t, 1e-7)) <= 1e-6);
    }
    // theta-term region: alpha < 0, alpha+beta > 0, alpha+gamma > 0
    {
        const mlz::QTriple t(-1.0, 3.0, 2.0);
        const Complex closed = mlz::q_closed_form(t);
        const Complex quad = mlz::q_quadrature(t, 1e-7);
        CHECK(std::abs(closed - quad) <= 1e-6);
        // removing the pi term must break the agreement: the step really fires
        const Complex pre = std::sqrt(M_PI) /
                            (4.0 * mlz::branch_sqrt(-1.0) * mlz::branch_sqrt(3.0) *
                             mlz::branch_sqrt(2.0));
        CHECK(std::abs((closed - pre * M_PI) - quad) > 1e-3);
    }
    // mixed signs without the theta term
    {
        const mlz::QTriple t(2.0, -0.8, 1.1);
        CHECK(std::abs(mlz::q_closed_form(t) - mlz::q_quadrature(t, 1e-7)) <= 1e-6);
    }
}

TEST_CASE("Q is symmetric under beta <-> gamma") {
    const mlz::QTriple a(1.3, -0.6, 2.2), b(1.3, 2.2, -0.6);
    CHECK(mlz::q_closed_form(a) == mlz::q_closed_form(b));
    CHECK(mlz::q_quadrature(a, 1e-6) == mlz::q_quadrature(b, 1e-6));
}

TEST_CASE("Q oracle equivalence on random off-resonant triples") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> mag(0.4, 3.0);
    std::uniform_int_distribution<int> coin(0, 1);
    int tested = 0;
    while (tested < 12) {
        const double alpha = (coin(rng) ? 1 : -1) * mag(rng);
        const double beta = (coin(rng) ? 1 : -1) * mag(rng);
        const double gamma = (coin(rng) ? 1 : -1) * mag(rng);
        if (alpha + beta + gamma < 0.35) continue;
        if (std::abs(alpha + beta) < 0.35 || std::abs(alpha + gamma) < 0.35)
            continue;
        const mlz::QTriple t(alpha, beta, gamma);
        CHECK(std::abs(mlz::q_closed_form(t) - mlz::q_quadrature(t, 1e-6)) <=
              1e-4);
        ++tested;
    }
}

TEST_CASE("Q quadrature refuses near-resonant frequencies quickly") {
    // alpha + beta nearly zero: the tail windows would need astronomically
    // many panels, so the budget guard fires instead of grinding
    const mlz::QTriple t(1.0, -0.9999999, 3.0);
    CHECK_THROWS_AS((void)mlz::q_quadrature(t, 1e-6), mlz::ConvergenceFailure);
}

TEST_CASE("resonant limit formula") {
    // descending 3-level lambda data
    std::mt19937 rng(5);
    const mlz::Model model = testutil::random_model(rng, 4);
    const mlz::LambdaMatrix lam = mlz::lambda_matrix(model);
    const auto& slopes = model.slopes();
    const auto& lv = lam.values;

    CHECK(mlz::resonant_r(lam, slopes, 0, 2, 2, 0) == 0.0);  // p=j and l=k
    // p = j, l < k: sgn(b_lk) = +1
    CHECK(mlz::resonant_r(lam, slopes, 0, 2, 1, 0) ==
          Approx(lv(0, 2) * lv(0, 2) * lv(0, 1) * lv(0, 1)));
    // p = j, l > k: sgn(b_lk) = -1
    CHECK(mlz::resonant_r(lam, slopes, 0, 2, 3, 0) ==
          Approx(-lv(0, 2) * lv(0, 2) * lv(0, 3) * lv(0, 3)));
    // l = k, p > j: sgn(b_jp) = +1
    CHECK(mlz::resonant_r(lam, slopes, 0, 2, 2, 1) ==
          Approx(lv(0, 2) * lv(0, 2) * lv(1, 2) * lv(1, 2)));
    CHECK_THROWS_AS(
        (void)mlz::resonant_r(lam, slopes, 0, 2, 1, 3), mlz::NotResonantError);
    CHECK_THROWS_AS(
        (void)mlz::resonant_r(lam, slopes, 2, 0, 0, 2), mlz::IndexError);
}
