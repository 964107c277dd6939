#include "mlz/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gauss.hpp"

namespace mlz {

namespace {

constexpr Complex kI{0.0, 1.0};

/// Power series of C(x) + i S(x); usable for x <= ~2 before cancellation
/// starts eating digits.
Complex fresnel_series(double x) {
    const double u = 0.5 * M_PI * x * x;
    // C: sum (-1)^n u^{2n} x / [(2n)! (4n+1)]
    // S: sum (-1)^n u^{2n+1} x / [(2n+1)! (4n+3)]
    double c = 0.0, s = 0.0;
    double term = 1.0;  // u^m / m!
    for (int m = 0;; ++m) {
        const double contrib = term / (2.0 * m + 1.0);
        if (m % 4 == 0) c += contrib;
        else if (m % 4 == 1) s += contrib;
        else if (m % 4 == 2) c -= contrib;
        else s -= contrib;
        if (term < 1e-18 && m > 2) break;
        term *= u / (m + 1.0);
        if (m > 300) break;
    }
    return Complex(c * x, s * x);
}

/// Asymptotic tail T(x) = int_x^inf e^{i pi t^2/2} dt by repeated integration
/// by parts; truncated at the smallest term. Accurate to ~1e-13 for x >= 4.4.
Complex fresnel_asymptotic(double x) {
    const Complex ipi = kI * M_PI;
    Complex term = 1.0 / (ipi * x);
    Complex sum = term;
    double prev = std::abs(term);
    for (int m = 0; m < 60; ++m) {
        term *= (2.0 * m + 1.0) / (ipi * x * x);
        const double mag = std::abs(term);
        if (mag >= prev) break;  // asymptotic minimum reached
        sum += term;
        prev = mag;
        if (mag < 1e-18) break;
    }
    const double phi = 0.5 * M_PI * x * x;
    const Complex tail = -std::exp(Complex(0.0, phi)) * sum;
    return Complex(0.5, 0.5) - tail;  // C + iS = (1+i)/2 - T
}

/// Middle region: panel Gauss-Legendre on the defining integral, panels equal
/// in t^2 so the phase advance per panel stays below ~pi/2.
Complex fresnel_quadrature(double x) {
    const int panels = static_cast<int>(std::ceil(0.5 * x * x)) + 2;
    Complex acc(0.0, 0.0);
    double t_lo = 0.0;
    for (int p = 1; p <= panels; ++p) {
        const double t_hi = x * std::sqrt(static_cast<double>(p) / panels);
        acc += detail::gl_integrate(
            [](double t) { return std::exp(Complex(0.0, 0.5 * M_PI * t * t)); },
            t_lo, t_hi, 16);
        t_lo = t_hi;
    }
    return acc;
}

}  // namespace

Complex fresnel_cs(double x) {
    if (x < 0.0) throw DomainError("fresnel integrals require x >= 0");
    if (x == 0.0) return Complex(0.0, 0.0);
    if (x <= 2.0) return fresnel_series(x);
    if (x < 4.4) return fresnel_quadrature(x);
    return fresnel_asymptotic(x);
}

double fresnel_c(double x) { return fresnel_cs(x).real(); }
double fresnel_s(double x) { return fresnel_cs(x).imag(); }

Complex fresnel_phase_integral(double mu, double s) {
    if (mu == 0.0) throw DomainError("fresnel_phase_integral requires mu != 0");
    if (s < 0.0) throw DomainError("fresnel_phase_integral requires s >= 0");
    const double am = std::abs(mu);
    const double xi = std::sqrt(2.0 * am / M_PI) * s;
    const Complex cs = fresnel_cs(xi);
    const double scale = std::sqrt(0.5 * M_PI / am);
    return Complex(scale * cs.real(),
                   (mu > 0.0 ? scale : -scale) * cs.imag());
}

Complex branch_sqrt(double b) {
    if (b == 0.0) throw DomainError("branch_sqrt requires b != 0");
    const double r = std::sqrt(std::abs(b)) * M_SQRT1_2;
    return b > 0.0 ? Complex(r, -r) : Complex(r, r);
}

Complex principal_arctan(Complex z) {
    const double x = z.real();
    const double y = z.imag();
    if (x == 0.0 && std::abs(y) == 1.0)
        throw BranchPointError("arctangent branch point at z = +-i");
    if (x == 0.0) {
        if (std::abs(y) < 1.0) return Complex(0.0, std::atanh(y));
        // On a cut. Counterclockwise-continuous value: real part +-pi/2,
        // imaginary part (1/2) log((y+1)/(y-1)).
        const double re = y > 0.0 ? 0.5 * M_PI : -0.5 * M_PI;
        return Complex(re, 0.5 * std::log((y + 1.0) / (y - 1.0)));
    }
    // Off the imaginary axis neither log argument can touch the negative real
    // axis, so the two principal logs combine to the principal arctangent.
    const Complex iz = kI * z;
    return 0.5 * kI * (std::log(1.0 - iz) - std::log(1.0 + iz));
}

QTriple::QTriple(double a, double b, double c) : alpha(a), beta(b), gamma(c) {
    if (alpha == 0.0 || beta == 0.0 || gamma == 0.0)
        throw DomainError("QTriple requires nonzero alpha, beta, gamma");
    if (!(alpha + beta + gamma > 0.0))
        throw DomainError("QTriple requires alpha + beta + gamma > 0");
    resonant = (alpha + beta == 0.0) || (alpha + gamma == 0.0);
}

Complex q_closed_form(const QTriple& t) {
    if (t.resonant)
        throw ResonantInputError(
            "Q diverges under the resonance condition alpha+beta = 0 or "
            "alpha+gamma = 0");
    const Complex ra = branch_sqrt(t.alpha);
    const Complex rb = branch_sqrt(t.beta);
    const Complex rc = branch_sqrt(t.gamma);
    const Complex rs = branch_sqrt(t.alpha + t.beta + t.gamma);
    // grouping keeps the expression bitwise symmetric under beta <-> gamma
    const Complex rbc = rb * rc;
    const Complex pre = std::sqrt(M_PI) / (4.0 * (ra * rbc));
    const double theta_term =
        (t.alpha < 0.0 && t.alpha + t.beta > 0.0 && t.alpha + t.gamma > 0.0)
            ? M_PI
            : 0.0;
    return pre * (theta_term + principal_arctan(rbc / (ra * rs)));
}

namespace {

/// Cumulative outer integral of the Q integrand on a grid uniform in u = s^2,
/// extended lazily; shared by the growing tail windows.
class QPartialIntegral {
public:
    QPartialIntegral(const QTriple& t, double du) : t_(t), du_(du) {
        values_.push_back(Complex(0.0, 0.0));  // G(0) = 0
    }

    double du() const { return du_; }

    /// G(k * du), integrating further panels on demand.
    Complex at(std::size_t k) {
        while (values_.size() <= k) {
            const std::size_t i = values_.size();
            const double s_lo = std::sqrt((i - 1) * du_);
            const double s_hi = std::sqrt(i * du_);
            const Complex panel = detail::gl_integrate(
                [this](double s) {
                    // F_beta * F_gamma first: bitwise beta <-> gamma symmetry
                    const Complex inner = fresnel_phase_integral(t_.beta, s) *
                                          fresnel_phase_integral(t_.gamma, s);
                    return std::exp(Complex(0.0, t_.alpha * s * s)) * inner;
                },
                s_lo, s_hi, 12);
            values_.push_back(values_.back() + panel);
        }
        return values_[k];
    }

private:
    QTriple t_;
    double du_;
    std::vector<Complex> values_;
};

}  // namespace

Complex q_quadrature(const QTriple& t, double tol) {
    if (t.resonant)
        throw ResonantInputError("q_quadrature diverges on resonant input");
    if (!(tol > 0.0)) throw DomainError("q_quadrature requires tol > 0");

    const double sum = t.alpha + t.beta + t.gamma;
    const double nu_min =
        std::min(std::min(std::abs(t.alpha), std::abs(t.alpha + t.beta)),
                 std::min(std::abs(t.alpha + t.gamma), sum));
    const double nu_max =
        std::max({std::abs(t.alpha), std::abs(t.beta), std::abs(t.gamma),
                  std::abs(t.alpha + t.beta), std::abs(t.alpha + t.gamma), sum});

    // Panel spacing resolves the fastest phase; window length is counted in
    // periods of the slowest.
    const double du = 0.3 / nu_max;
    QPartialIntegral partial(t, du);

    Complex prev(0.0, 0.0);
    bool have_prev = false;
    double u0 = std::max(16.0 / nu_min, 8.0);
    constexpr double kPanelBudget = 4e6;
    for (int attempt = 0; attempt < 9; ++attempt) {
        const double len = 3.0 * u0;
        if ((u0 + len) / du > kPanelBudget)
            throw ConvergenceFailure(
                "q_quadrature: frequencies too close to resonance for the "
                "panel budget");
        const std::size_t k_lo = static_cast<std::size_t>(std::ceil(u0 / du));
        const std::size_t k_hi = static_cast<std::size_t>(std::ceil((u0 + len) / du));
        Complex acc(0.0, 0.0);
        double wsum = 0.0;
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const double frac = (k * du - u0) / len;
            const double w = std::sin(M_PI * frac);
            const double w2 = w * w;
            acc += w2 * partial.at(k);
            wsum += w2;
        }
        const Complex windowed = acc / wsum;
        if (have_prev && std::abs(windowed - prev) < 0.5 * tol) return windowed;
        prev = windowed;
        have_prev = true;
        u0 *= 2.0;
    }
    throw ConvergenceFailure(
        "q_quadrature tail did not stabilize within the panel budget");
}

double resonant_r(const LambdaMatrix& lambda, const std::vector<double>& slopes,
                  int j, int k, int l, int p) {
    const int n = lambda.n;
    if (static_cast<int>(slopes.size()) != n)
        throw DimensionMismatchError("slopes size does not match lambda matrix");
    auto check = [n](int idx, const char* name) {
        if (idx < 0 || idx >= n)
            throw IndexError(std::string("index ") + name + " out of range");
    };
    check(j, "j"); check(k, "k"); check(l, "l"); check(p, "p");
    if (!(j < k)) throw IndexError("resonant_r requires j < k");

    const auto& lam = lambda.values;
    if (p == j && l == k) return 0.0;
    if (p == j) {
        const double sgn = slopes[l] > slopes[k] ? 1.0 : -1.0;
        return sgn * lam(j, k) * lam(j, k) * lam(j, l) * lam(j, l);
    }
    if (l == k) {
        const double sgn = slopes[j] > slopes[p] ? 1.0 : -1.0;
        return sgn * lam(j, k) * lam(j, k) * lam(p, k) * lam(p, k);
    }
    throw NotResonantError("resonant_r requires p == j or l == k");
}

}  // namespace mlz
