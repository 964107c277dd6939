#include "mlz/propagator.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <future>
#include <string>

#include "mlz/wengine.hpp"

namespace mlz {

namespace {

namespace odeint = boost::numeric::odeint;

using State = std::vector<double>;  // 2 n^2 doubles viewing an n x n complex W

Eigen::Map<Eigen::MatrixXcd> as_matrix(State& s, int n) {
    return Eigen::Map<Eigen::MatrixXcd>(
        reinterpret_cast<std::complex<double>*>(s.data()), n, n);
}

Eigen::Map<const Eigen::MatrixXcd> as_matrix(const State& s, int n) {
    return Eigen::Map<const Eigen::MatrixXcd>(
        reinterpret_cast<const std::complex<double>*>(s.data()), n, n);
}

/// dW = -i g (A~ W + W A~), with A~ built in place. In u-coordinates
/// (u = t^2, t = sqrt(u)) the whole right side picks up 1/(2 sqrt(u)).
class WPictureRhs {
public:
    WPictureRhs(const Model& model, double g, bool u_coords)
        : model_(&model), g_(g), u_coords_(u_coords), n_(model.n()),
          atilde_(n_, n_), anti_(n_, n_) {}

    void operator()(const State& y, State& dydt, double x) {
        const double t = u_coords_ ? std::sqrt(x) : x;
        const double u = t * t;
        for (int j = 0; j < n_; ++j) {
            atilde_(j, j) = 0.0;
            for (int k = j + 1; k < n_; ++k) {
                const double a = model_->couplings()(j, k);
                if (a == 0.0) {
                    atilde_(j, k) = 0.0;
                    atilde_(k, j) = 0.0;
                    continue;
                }
                const double phase =
                    0.5 * (model_->slopes()[j] - model_->slopes()[k]) * u;
                const std::complex<double> e(std::cos(phase), std::sin(phase));
                atilde_(j, k) = a * e;
                atilde_(k, j) = a * std::conj(e);
            }
        }
        const auto w = as_matrix(y, n_);
        dydt.resize(y.size());
        auto dw = as_matrix(dydt, n_);
        anti_.noalias() = atilde_ * w;
        anti_.noalias() += w * atilde_;
        const double scale = u_coords_ ? 0.5 / t : 1.0;
        dw = std::complex<double>(0.0, -g_ * scale) * anti_;
    }

private:
    const Model* model_;
    double g_;
    bool u_coords_;
    int n_;
    Eigen::MatrixXcd atilde_;
    Eigen::MatrixXcd anti_;
};

/// Adaptive RKF78 driver that lands exactly on each requested coordinate.
class Driver {
public:
    Driver(const Model& model, double g, double rtol, double atol)
        : model_(model), g_(g),
          stepper_(odeint::make_controlled(
              atol, rtol, odeint::runge_kutta_fehlberg78<State>())) {
        const int n = model.n();
        y_.assign(2 * static_cast<std::size_t>(n) * n, 0.0);
        auto w = as_matrix(y_, n);
        w.setIdentity();
    }

    /// Advances to time coordinate `target` in the given chart.
    void advance_t(double target) { advance(target, /*u_coords=*/false, t_); }
    void advance_u(double target) {
        if (u_ < 0.0) u_ = t_ * t_;  // chart switch
        advance(target, /*u_coords=*/true, u_);
    }

    const State& state() const { return y_; }
    Eigen::MatrixXcd matrix() const {
        return as_matrix(y_, model_.n());
    }

private:
    void advance(double target, bool u_coords, double& x) {
        if (x >= target) return;
        WPictureRhs rhs(model_, g_, u_coords);
        double dt = std::min(dt_, target - x);
        int rejects = 0;
        while (x < target) {
            if (target - x < 1e-12 * std::max(1.0, target)) {
                x = target;  // snap: the remainder is below resolution
                break;
            }
            const double natural = dt;
            double trial = std::min(natural, target - x);
            const bool clamped = trial < natural;
            const auto res = stepper_.try_step(rhs, y_, x, trial);
            if (res == odeint::controlled_step_result::fail) {
                dt = trial;
                if (++rejects > 80 || dt < 1e-14 * std::max(1.0, std::abs(x)))
                    throw StepSizeUnderflow(
                        "propagator step size underflow at coordinate " +
                        std::to_string(x));
            } else {
                rejects = 0;
                // a clamped step says nothing about the natural scale
                dt = clamped ? std::max(trial, natural) : trial;
            }
        }
        dt_ = dt;
    }

    const Model& model_;
    double g_;
    odeint::result_of::make_controlled<
        odeint::runge_kutta_fehlberg78<State>>::type stepper_;
    State y_;
    double t_ = 0.0;
    double u_ = -1.0;
    double dt_ = 0.01;
};

double unitarity_defect(const Eigen::MatrixXcd& w) {
    const int n = static_cast<int>(w.rows());
    return (w.adjoint() * w - Eigen::MatrixXcd::Identity(n, n))
        .cwiseAbs()
        .maxCoeff();
}

double min_slope_gap(const Model& model) {
    double m = std::numeric_limits<double>::infinity();
    for (int j = 0; j < model.n(); ++j)
        for (int k = j + 1; k < model.n(); ++k)
            m = std::min(m, std::abs(model.slopes()[j] - model.slopes()[k]));
    return m;
}

struct WindowAverage {
    Eigen::MatrixXd mean_p;    // windowed mean of |W_jk|^2
    double mean_inv_u = 0.0;   // windowed mean of 1/u
    double mean_inv_u2 = 0.0;  // windowed mean of 1/u^2
};

int max_threads_from_env() {
    if (const char* env = std::getenv("MLZ_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 2 : static_cast<int>(hw);
}

}  // namespace

Eigen::MatrixXcd propagate(const Model& model, double g, double t_final,
                           double tol) {
    if (!(t_final > 0.0)) throw DomainError("propagate requires t_final > 0");
    if (!(tol > 0.0)) throw DomainError("propagate requires tol > 0");
    const double rtol = std::max(tol / 50.0, 1e-14);
    const double atol = rtol * 1e-2;
    Driver driver(model, g, rtol, atol);
    const double t_switch = std::min(1.0, t_final);
    driver.advance_t(t_switch);
    if (t_final > t_switch) driver.advance_u(t_final * t_final);
    Eigen::MatrixXcd w = driver.matrix();
    const double defect = unitarity_defect(w);
    if (defect > 10.0 * tol)
        throw NonUnitaryDrift("unitarity defect " + std::to_string(defect) +
                              " exceeds 10x tolerance");
    return w;
}

TransitionMatrix probabilities(const Model& model, double g, double tol) {
    if (!(tol > 0.0)) throw DomainError("probabilities requires tol > 0");
    const int n = model.n();
    TransitionMatrix out;
    out.n = n;
    if (g == 0.0) {
        out.values = Eigen::MatrixXd::Identity(n, n);
        out.est_error = 0.0;
        out.t_final = 0.0;
        out.solver_rtol = 0.0;
        return out;
    }

    const double b_min = min_slope_gap(model);
    const double rtol = std::clamp(tol * 3e-3, 1e-13, 1e-10);
    const double atol = rtol * 1e-2;
    out.solver_rtol = rtol;

    const double t0 = std::max(12.0, 9.0 / std::sqrt(b_min));
    const double u_base = t0 * t0;
    constexpr int kMaxLevels = 9;
    constexpr int kSamples = 224;
    constexpr double kWindowLo = 0.5;

    Driver driver(model, g, rtol, atol);
    driver.advance_t(1.0);

    std::vector<WindowAverage> levels;
    double est = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd extrapolated = Eigen::MatrixXd::Zero(n, n);
    double best_est = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd best_value;
    double best_t = 0.0;

    for (int level = 0; level < kMaxLevels; ++level) {
        const double u_top = u_base * std::pow(2.0, level);
        const double u_lo = kWindowLo * u_top;
        driver.advance_u(u_lo);

        WindowAverage wa;
        wa.mean_p = Eigen::MatrixXd::Zero(n, n);
        double wsum = 0.0;
        for (int i = 1; i < kSamples; ++i) {  // weight vanishes at both ends
            const double frac = static_cast<double>(i) / kSamples;
            const double u = u_lo + frac * (u_top - u_lo);
            driver.advance_u(u);
            const double hw = std::sin(M_PI * frac);
            const double w4 = hw * hw * hw * hw;  // sin^4: fifth-order sidelobes
            const Eigen::MatrixXcd wmat = driver.matrix();
            wa.mean_p += w4 * wmat.cwiseAbs2();
            wa.mean_inv_u += w4 / u;
            wa.mean_inv_u2 += w4 / (u * u);
            wsum += w4;
        }
        wa.mean_p /= wsum;
        wa.mean_inv_u /= wsum;
        wa.mean_inv_u2 /= wsum;
        levels.push_back(std::move(wa));
        out.t_final = std::sqrt(u_top);

        if (levels.size() < 3) continue;

        // Windowed averaging is linear, so a tail P(u) ~ c0 + c1/u + c2/u^2
        // gives exactly mean_p = c0 + c1 <1/u> + c2 <1/u^2> per level.
        const std::size_t L = levels.size();
        auto linear_c0 = [&](std::size_t lo) {
            // least-squares line through levels [lo, L)
            double s1 = 0, sx = 0, sxx = 0;
            Eigen::MatrixXd sy = Eigen::MatrixXd::Zero(n, n);
            Eigen::MatrixXd sxy = Eigen::MatrixXd::Zero(n, n);
            for (std::size_t i = lo; i < L; ++i) {
                const double x = levels[i].mean_inv_u;
                s1 += 1.0; sx += x; sxx += x * x;
                sy += levels[i].mean_p;
                sxy += x * levels[i].mean_p;
            }
            const double det = s1 * sxx - sx * sx;
            return Eigen::MatrixXd(((sxx * sy - sx * sxy) / det).eval());
        };

        const Eigen::MatrixXd lin3 = linear_c0(L - 3);
        if (L < 4) {
            extrapolated = lin3;
            continue;
        }

        // quadratic fit on the last four levels
        Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
        Eigen::MatrixXd r0 = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd r1 = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = L - 4; i < L; ++i) {
            const Eigen::Vector3d v(1.0, levels[i].mean_inv_u,
                                    levels[i].mean_inv_u2);
            m += v * v.transpose();
            r0 += levels[i].mean_p;
            r1 += levels[i].mean_inv_u * levels[i].mean_p;
            r2 += levels[i].mean_inv_u2 * levels[i].mean_p;
        }
        const Eigen::Matrix3d minv = m.inverse();
        const Eigen::MatrixXd quad_c0 = minv(0, 0) * r0 + minv(0, 1) * r1 +
                                        minv(0, 2) * r2;
        const Eigen::MatrixXd quad_c1 = minv(1, 0) * r0 + minv(1, 1) * r1 +
                                        minv(1, 2) * r2;
        const Eigen::MatrixXd quad_c2 = minv(2, 0) * r0 + minv(2, 1) * r1 +
                                        minv(2, 2) * r2;
        double fit_residual = 0.0;
        for (std::size_t i = L - 4; i < L; ++i) {
            const Eigen::MatrixXd pred = quad_c0 +
                                         levels[i].mean_inv_u * quad_c1 +
                                         levels[i].mean_inv_u2 * quad_c2;
            fit_residual = std::max(
                fit_residual, (levels[i].mean_p - pred).cwiseAbs().maxCoeff());
        }

        extrapolated = quad_c0;
        // |quad - lin3| bounds the error of the inferior linear fit; the
        // quadratic value is charged half of it plus the model inconsistency
        est = 0.5 * (quad_c0 - lin3).cwiseAbs().maxCoeff() +
              2.0 * fit_residual + 30.0 * rtol;
        if (std::getenv("MLZ_LADDER_DEBUG")) {
            std::fprintf(stderr,
                         "[ladder] level=%d u_top=%.0f quad-lin3=%.3e fitres=%.3e "
                         "est=%.3e P01=%.12f\n",
                         level, u_top, (quad_c0 - lin3).cwiseAbs().maxCoeff(),
                         fit_residual, est, quad_c0(0, std::min(1, n - 1)));
        }
        if (est < best_est) {
            best_est = est;
            best_value = extrapolated;
            best_t = out.t_final;
        }
        if (best_est <= tol) break;
        // integrator drift grows with the horizon; once the estimate degrades
        // well past the best level there is nothing left to gain
        if (est > 3.0 * best_est && level >= 5) break;
    }

    if (!(best_est <= tol)) {
        char msg[128];
        std::snprintf(msg, sizeof(msg),
                      "probability ladder stalled at est_error %.3e > tol %.3e",
                      best_est, tol);
        throw NoConvergence(msg);
    }

    const Eigen::MatrixXcd wfinal = driver.matrix();
    const double defect = unitarity_defect(wfinal);
    if (defect > std::max(1e-8, 10.0 * tol))
        throw NonUnitaryDrift("unitarity defect " + std::to_string(defect) +
                              " at end of ladder");

    out.values = best_value;
    out.est_error = best_est;
    out.t_final = best_t;
    return out;
}

ResidualScan residual_scan(const Model& model, const std::vector<double>& g_values,
                           const SeriesCoefficients& coeffs, double tol,
                           double band) {
    if (!(tol > 0.0)) throw DomainError("residual_scan requires tol > 0");
    for (std::size_t i = 1; i < g_values.size(); ++i)
        if (!(g_values[i] > g_values[i - 1]))
            throw DomainError("g grid must be strictly increasing");
    if (!g_values.empty() && g_values.front() < 0.0)
        throw DomainError("g grid must be nonnegative");

    const int n = model.n();
    ResidualScan scan;
    scan.g_values = g_values;
    scan.band = band;
    scan.order = 4;
    const std::size_t m = g_values.size();
    scan.probabilities.resize(m);
    scan.residuals.resize(m);
    scan.ratios.resize(m);
    scan.status.resize(m);
    scan.est_errors.resize(m);

    auto target_for = [tol](double g) {
        if (g == 0.0) return tol;
        // sharp enough that dP ~ g^5 stays resolved, but never below the
        // ladder's practical floor
        const double want = 1e-2 * std::pow(g, 5);
        return std::clamp(want, std::max(tol, 2e-8), 1e-6);
    };

    auto run_one = [&](std::size_t i) {
        const double g = g_values[i];
        const TransitionMatrix num = probabilities(model, g, target_for(g));
        scan.probabilities[i] = num.values;
        scan.est_errors[i] = num.est_error;
        const Eigen::MatrixXd truncated = evaluate_at(coeffs, g);
        const Eigen::MatrixXd dp = num.values - truncated;
        scan.residuals[i] = dp;
        Eigen::MatrixXd ratio = Eigen::MatrixXd::Zero(n, n);
        Eigen::MatrixXi status = Eigen::MatrixXi::Zero(n, n);
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                const int order = (j == k) ? 6 : 5;
                const double gm = std::pow(g, order);
                if (g == 0.0 || std::abs(dp(j, k)) < 100.0 * num.est_error) {
                    status(j, k) = static_cast<int>(ScanStatus::PrecisionFloor);
                    ratio(j, k) = (gm == 0.0) ? 0.0 : dp(j, k) / gm;
                } else {
                    ratio(j, k) = dp(j, k) / gm;
                }
            }
        }
        scan.ratios[i] = ratio;
        scan.status[i] = status;
    };

    const int max_threads = max_threads_from_env();
    if (max_threads <= 1 || m <= 1) {
        for (std::size_t i = 0; i < m; ++i) run_one(i);
    } else {
        std::size_t next = 0;
        while (next < m) {
            const std::size_t batch =
                std::min<std::size_t>(static_cast<std::size_t>(max_threads), m - next);
            std::vector<std::future<void>> futs;
            futs.reserve(batch);
            for (std::size_t b = 0; b < batch; ++b)
                futs.push_back(std::async(std::launch::async, run_one, next + b));
            for (auto& f : futs) f.get();
            next += batch;
        }
    }

    scan.ratio_stable = Eigen::MatrixXi::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            double r1 = 0.0, r2 = 0.0;
            int found = 0;
            for (std::size_t i = 0; i < m && found < 2; ++i) {
                if (scan.status[i](j, k) ==
                    static_cast<int>(ScanStatus::PrecisionFloor))
                    continue;
                (found == 0 ? r1 : r2) = scan.ratios[i](j, k);
                ++found;
            }
            if (found == 2) {
                const double scale = std::max(std::abs(r1), std::abs(r2));
                scan.ratio_stable(j, k) =
                    (scale > 0.0 && std::abs(r1 - r2) <= band * scale) ? 1 : 0;
            }
        }
    }
    return scan;
}

}  // namespace mlz
