#include "mlz/wengine.hpp"

#include <algorithm>
#include <cmath>

#include "gauss.hpp"

namespace mlz {

namespace {

constexpr Complex kI{0.0, 1.0};

double max_slope_gap(const Model& model) {
    double m = 0.0;
    for (int j = 0; j < model.n(); ++j)
        for (int k = 0; k < model.n(); ++k)
            m = std::max(m, std::abs(model.slopes()[j] - model.slopes()[k]));
    return m;
}

int sgn(double x) { return x > 0.0 ? 1 : -1; }

void check_indices(const Model& model, std::initializer_list<int> idx) {
    for (int i : idx)
        if (i < 0 || i >= model.n()) throw IndexError("level index out of range");
}

/// Panel boundaries uniform in u = s^2 over [0, t], phase step per panel
/// bounded by `rad` radians of the fastest oscillation.
std::vector<double> u_panels(double t, double numax, double rad) {
    const double u_end = t * t;
    const int count = std::max(1, static_cast<int>(std::ceil(u_end * numax / rad)));
    std::vector<double> s(count + 1);
    for (int i = 0; i <= count; ++i)
        s[i] = std::sqrt(u_end * static_cast<double>(i) / count);
    return s;
}

/// int_0^t I(s) A~(s) I(s) ds with the stated panel resolution.
Eigen::MatrixXcd w3_double_integral(const Model& model, double t, double rad) {
    const int n = model.n();
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n, n);
    if (t <= 0.0) return acc;
    const double numax = 0.5 * max_slope_gap(model);
    const auto bounds = u_panels(t, numax, rad);
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
        acc += detail::gl_integrate(
            [&model](double s) -> Eigen::MatrixXcd {
                const Eigen::MatrixXcd is = atilde_integral(model, s);
                return is * atilde(model, s) * is;
            },
            bounds[i], bounds[i + 1], 12);
    }
    return acc;
}

}  // namespace

Eigen::MatrixXcd atilde(const Model& model, double t) {
    const int n = model.n();
    Eigen::MatrixXcd m(n, n);
    const double u = 0.5 * t * t;
    for (int j = 0; j < n; ++j) {
        m(j, j) = 0.0;
        for (int k = j + 1; k < n; ++k) {
            const double phase = (model.slopes()[j] - model.slopes()[k]) * u;
            const Complex e = std::exp(Complex(0.0, phase));
            m(j, k) = model.couplings()(j, k) * e;
            m(k, j) = model.couplings()(k, j) * std::conj(e);
        }
    }
    return m;
}

Eigen::MatrixXcd atilde_integral(const Model& model, double t) {
    const int n = model.n();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            if (model.couplings()(j, k) == 0.0) continue;
            const double bjk = model.slopes()[j] - model.slopes()[k];
            const Complex v =
                model.couplings()(j, k) * fresnel_phase_integral(0.5 * bjk, t);
            m(j, k) = v;
            m(k, j) = std::conj(v);
        }
    }
    return m;
}

WMatrix w1_infinity(const LambdaMatrix& lambda, const std::vector<double>& slopes) {
    const int n = lambda.n;
    if (static_cast<int>(slopes.size()) != n)
        throw DimensionMismatchError("slopes size does not match lambda matrix");
    WMatrix w{n, 1, kInfiniteTime, Eigen::MatrixXcd::Zero(n, n)};
    const Complex sqrt2{std::sqrt(2.0), 0.0};
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (j == k) continue;
            const Complex phase =
                sgn(slopes[j] - slopes[k]) > 0 ? Complex(M_SQRT1_2, M_SQRT1_2)
                                               : Complex(M_SQRT1_2, -M_SQRT1_2);
            w.values(j, k) = -kI * sqrt2 * lambda.values(j, k) * phase;
        }
    }
    return w;
}

WMatrix w2_infinity(const LambdaMatrix& lambda, const std::vector<double>& slopes) {
    const int n = lambda.n;
    if (static_cast<int>(slopes.size()) != n)
        throw DimensionMismatchError("slopes size does not match lambda matrix");
    WMatrix w{n, 2, kInfiniteTime, Eigen::MatrixXcd::Zero(n, n)};
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            Complex acc(0.0, 0.0);
            for (int l = 0; l < n; ++l) {
                if (l == j || l == k) continue;
                const double prod = lambda.values(j, l) * lambda.values(l, k);
                if (j == k) {
                    acc += prod;  // sgn(b_jl) = -sgn(b_lj) always
                    continue;
                }
                const int s = sgn(slopes[j] - slopes[l]) + sgn(slopes[l] - slopes[k]);
                if (s == 0) acc += prod;
                else acc += Complex(0.0, static_cast<double>(s / 2)) * prod;
            }
            w.values(j, k) = -acc;
        }
    }
    return w;
}

WMatrix w_n_finite(const Model& model, int order, double t, double tol) {
    if (order < 1 || order > 3)
        throw IndexError("w_n_finite supports orders 1..3");
    if (t < 0.0) throw DomainError("w_n_finite requires t >= 0");
    if (!(tol > 0.0)) throw DomainError("w_n_finite requires tol > 0");

    const int n = model.n();
    WMatrix w{n, order, t, Eigen::MatrixXcd::Zero(n, n)};
    if (order == 1) {
        w.values = -2.0 * kI * atilde_integral(model, t);
        return w;
    }
    if (order == 2) {
        const Eigen::MatrixXcd it = atilde_integral(model, t);
        w.values = -2.0 * (it * it);
        return w;
    }
    // order 3: symmetric cubed term plus the irreducible double integral
    const Eigen::MatrixXcd it = atilde_integral(model, t);
    double rad = 1.2;
    Eigen::MatrixXcd inner = w3_double_integral(model, t, rad);
    for (int refine = 0; refine < 7; ++refine) {
        rad *= 0.5;
        const Eigen::MatrixXcd finer = w3_double_integral(model, t, rad);
        const double diff = (finer - inner).cwiseAbs().maxCoeff();
        inner = finer;
        if (diff < tol) {
            w.values = 2.0 * kI * (it * it * it) - 2.0 * kI * inner;
            return w;
        }
    }
    throw ConvergenceFailure("w_n_finite: panel refinement did not reach tol");
}

Eigen::MatrixXd pn_finite(const Model& model, int order, double t, double tol) {
    if (order < 1 || order > 4)
        throw IndexError("pn_finite supports orders 1..4");
    if (t < 0.0) throw DomainError("pn_finite requires t >= 0");
    if (!(tol > 0.0)) throw DomainError("pn_finite requires tol > 0");

    const int n = model.n();
    std::vector<Eigen::MatrixXcd> w(4);
    const Eigen::MatrixXcd it = atilde_integral(model, t);
    w[0] = Eigen::MatrixXcd::Identity(n, n);
    w[1] = -2.0 * kI * it;
    w[2] = -2.0 * (it * it);
    if (order >= 3) w[3] = w_n_finite(model, 3, t, 0.25 * tol).values;

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            if (order == 4 && j == k) continue;  // needs W_4; filled below
            Complex acc(0.0, 0.0);
            for (int m = 0; m <= order; ++m) {
                if (order == 4 && (m == 0 || m == 4)) continue;  // zero off-diagonal
                acc += w[m](j, k) * std::conj(w[order - m](j, k));
            }
            p(j, k) = acc.real();
        }
    }
    if (order == 4) {
        for (int j = 0; j < n; ++j) {
            double row = 0.0;
            for (int k = 0; k < n; ++k)
                if (k != j) row += p(j, k);
            p(j, j) = -row;
        }
    }
    return p;
}

double resonant_limit_check(const Model& model, int j, int k, int l, int p,
                            const std::vector<double>& t_grid) {
    check_indices(model, {j, k, l, p});
    if (!(j < k)) throw IndexError("resonant_limit_check requires j < k");
    if (p != j && l != k)
        throw NotResonantError("quadruple is not resonant (needs p == j or l == k)");
    if (t_grid.size() < 16)
        throw DomainError("resonant_limit_check needs a t grid with >= 16 points");
    if (!std::is_sorted(t_grid.begin(), t_grid.end()))
        throw DomainError("t_grid must be increasing");

    const double a_lp = model.couplings()(l, p);
    const double a_jl = model.couplings()(j, l);
    const double a_pk = model.couplings()(p, k);
    const double b_lp = model.slopes()[l] - model.slopes()[p];
    const double numax = 0.5 * max_slope_gap(model);

    // cumulative T(t) = int_0^t A~_lp(s) I_jl(s) I_pk(s) ds on the grid
    auto integrand = [&](double s) -> Complex {
        const Complex alp =
            a_lp * std::exp(Complex(0.0, 0.5 * b_lp * s * s));
        const Complex ijl =
            a_jl == 0.0 ? Complex(0, 0)
                        : a_jl * fresnel_phase_integral(
                                     0.5 * (model.slopes()[j] - model.slopes()[l]), s);
        const Complex ipk =
            a_pk == 0.0 ? Complex(0, 0)
                        : a_pk * fresnel_phase_integral(
                                     0.5 * (model.slopes()[p] - model.slopes()[k]), s);
        return alp * ijl * ipk;
    };

    std::vector<double> r_of_t(t_grid.size());
    Complex cumulative(0.0, 0.0);
    double prev_t = 0.0;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const double du = 1.0 / numax;
        const double u0 = prev_t * prev_t, u1 = t * t;
        const int panels = std::max(1, static_cast<int>(std::ceil((u1 - u0) / du)));
        for (int q = 0; q < panels; ++q) {
            const double sa = std::sqrt(u0 + (u1 - u0) * q / panels);
            const double sb = std::sqrt(u0 + (u1 - u0) * (q + 1) / panels);
            cumulative += detail::gl_integrate(integrand, sa, sb, 12);
        }
        const double bjk = model.slopes()[j] - model.slopes()[k];
        const Complex w1t = model.couplings()(j, k) == 0.0
                                ? Complex(0, 0)
                                : -2.0 * kI * model.couplings()(j, k) *
                                      fresnel_phase_integral(0.5 * bjk, t);
        const Complex w3t = -2.0 * kI * cumulative;
        r_of_t[i] = 2.0 * std::real(std::conj(w1t) * w3t);
        prev_t = t;
    }

    // Hann-windowed averages in u over the top two octaves, then 1/u Richardson.
    auto window_mean = [&](double u_lo, double u_hi) {
        double acc = 0.0, wsum = 0.0;
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            const double u = t_grid[i] * t_grid[i];
            if (u < u_lo || u > u_hi) continue;
            const double w = std::sin(M_PI * (u - u_lo) / (u_hi - u_lo));
            acc += w * w * r_of_t[i];
            wsum += w * w;
        }
        if (wsum == 0.0)
            throw DomainError("t_grid too sparse for window extrapolation");
        return acc / wsum;
    };
    const double u_max = t_grid.back() * t_grid.back();
    const double mean_hi = window_mean(0.5 * u_max, u_max);        // centroid ~0.75 u
    const double mean_lo = window_mean(0.25 * u_max, 0.5 * u_max); // centroid ~0.375 u
    const double limit = 2.0 * mean_hi - mean_lo;

    // decay diagnostic: deviations from the limit must not grow along the grid
    double amp_first = 0.0, amp_second = 0.0;
    for (std::size_t i = t_grid.size() / 4; i < t_grid.size(); ++i) {
        const double dev = std::abs(r_of_t[i] - limit);
        if (i < t_grid.size() / 2) amp_first = std::max(amp_first, dev);
        else amp_second = std::max(amp_second, dev);
    }
    if (amp_second > 1.25 * amp_first + 1e-12)
        throw NoConvergence("resonant combination R(t) is not settling");
    return limit;
}

}  // namespace mlz
