// Acceptance suite: end-to-end checks of the library against its external
// contracts, one line per criterion. Returns the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <array>
#include <random>
#include <string>
#include <vector>

#include "mlz/model.hpp"
#include "mlz/propagator.hpp"
#include "mlz/series.hpp"
#include "mlz/specfun.hpp"
#include "mlz/wengine.hpp"
#include "test_util.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

struct Criterion {
    explicit Criterion(std::string name) : name_(std::move(name)), start_(Clock::now()) {}

    void expect(bool ok, const std::string& detail) {
        if (!ok) {
            ok_ = false;
            details_.push_back(detail);
        }
    }

    void finish(double runtime_limit_s) {
        const double dt =
            std::chrono::duration<double>(Clock::now() - start_).count();
        if (dt > runtime_limit_s) {
            ok_ = false;
            details_.push_back("runtime " + std::to_string(dt) + " s exceeds " +
                               std::to_string(runtime_limit_s) + " s");
        }
        std::printf("[%s] %s (%.1f s)\n", ok_ ? "PASS" : "FAIL", name_.c_str(), dt);
        for (const auto& d : details_) std::printf("       - %s\n", d.c_str());
        if (!ok_) ++g_failures;
    }

    std::string name_;
    Clock::time_point start_;
    bool ok_ = true;
    std::vector<std::string> details_;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

Eigen::MatrixXd coupling3(double a12, double a13, double a23) {
    Eigen::MatrixXd a(3, 3);
    a << 0, a12, a13, a12, 0, a23, a13, a23, 0;
    return a;
}

mlz::Model fig2_model() {
    return mlz::Model({2.0, 0.0, -1.0}, coupling3(1.0, 1.5, 1.8), 1.0, "fig2");
}

mlz::Model lz_model() {
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, 1, 0;
    return mlz::Model({1.0, -1.0}, a, 1.0, "lz");
}

mlz::Model four_state_model() {
    Eigen::MatrixXd a(4, 4);
    a << 0, 0.9, 0.6, 0.5, 0.9, 0, 0.8, 0.4, 0.6, 0.8, 0, 0.7, 0.5, 0.4, 0.7, 0;
    return mlz::Model({1.6, 0.4, -0.6, -1.7}, a, 1.0, "allcoupled-4state");
}

mlz::Model ssh5_model() {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
    auto set = [&a](int j, int k, double v) { a(j, k) = a(k, j) = v; };
    set(0, 1, 1.0); set(0, 2, 0.8); set(0, 3, 0.6);
    set(1, 4, -0.6); set(2, 4, -0.8); set(3, 4, -1.0);
    return mlz::Model({-0.7, -1.9, 0.0, 1.9, 0.7}, a, 1.0, "ssh-5state");
}

std::vector<double> geometric_grid(double a, double b, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i)
        g[i] = a * std::pow(b / a, static_cast<double>(i) / (n - 1));
    return g;
}

void criterion_1_lz_closed_loop() {
    Criterion c("criterion 1: two-level closed loop against the exact LZ formula");
    const mlz::Model m = lz_model();
    const mlz::LambdaMatrix lam = mlz::lambda_matrix(m);
    const double l = lam.values(0, 1);

    for (double gl : {0.1, 0.5, 1.0}) {
        const double g = gl / l;
        const mlz::TransitionMatrix tm = mlz::probabilities(m, g, 1e-7);
        const double diff = (tm.values - mlz::lz_exact(l, g)).cwiseAbs().maxCoeff();
        c.expect(diff <= 1e-6, "g lambda = " + fmt(gl) + ": |dP| = " + fmt(diff));
    }
    const mlz::SeriesCoefficients sc = mlz::series_matrix(lam);
    c.expect(sc.p2(0, 1) == 2.0 * l * l, "p2 != 2 lambda^2");
    c.expect(sc.p3(0, 1) == 0.0, "p3 != 0");
    c.expect(std::abs(sc.p4(0, 1) + 2.0 * std::pow(l, 4)) <=
                 1e-15 * 2.0 * std::pow(l, 4),
             "p4 != -2 lambda^4");
    c.finish(5.0);
}

void criterion_2_fig2_reproduction() {
    Criterion c("criterion 2: 3-level comparison data across g in [0.05, 0.5]");
    const mlz::Model m = fig2_model();
    const mlz::SeriesCoefficients sc = mlz::series_for_model(m);
    const std::vector<double> grid = geometric_grid(0.05, 0.5, 12);
    const mlz::ResidualScan scan = mlz::residual_scan(m, grid, sc, 1e-10);

    // (a) series and numeric coincide to 10% of P12 up to g = 0.2
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] > 0.2) continue;
        const double series_p = mlz::evaluate_at(sc, grid[i])(0, 1);
        const double dp = std::abs(scan.residuals[i](0, 1));
        c.expect(dp <= 0.1 * series_p,
                 "(a) g = " + fmt(grid[i]) + ": |dP12| = " + fmt(dp) +
                     " vs 0.1 P12 = " + fmt(0.1 * series_p));
    }
    // (b) dP12/g^5 stable within 25% at the two smallest g
    const double r5a = scan.ratios[0](0, 1), r5b = scan.ratios[1](0, 1);
    c.expect(scan.status[0](0, 1) == 0 && scan.status[1](0, 1) == 0,
             "(b) smallest-g ratios hit the precision floor");
    c.expect(std::abs(r5a - r5b) <= 0.25 * std::max(std::abs(r5a), std::abs(r5b)),
             "(b) dP12/g^5: " + fmt(r5a) + " vs " + fmt(r5b));
    // (d) dP22/g^6 likewise
    const double r6a = scan.ratios[0](1, 1), r6b = scan.ratios[1](1, 1);
    c.expect(scan.status[0](1, 1) == 0 && scan.status[1](1, 1) == 0,
             "(d) smallest-g ratios hit the precision floor");
    c.expect(std::abs(r6a - r6b) <= 0.25 * std::max(std::abs(r6a), std::abs(r6b)),
             "(d) dP22/g^6: " + fmt(r6a) + " vs " + fmt(r6b));
    c.finish(120.0);
}

void criterion_3_be_cross_check() {
    Criterion c("criterion 3: BE survival formula, 20 random models at g = 0.3");
    std::mt19937 rng(20240801);
    std::uniform_int_distribution<int> nd(3, 5);
    for (int rep = 0; rep < 20; ++rep) {
        const mlz::Model m = testutil::random_model(rng, nd(rng), 0.5, 0.8);
        const int n = m.n();
        const mlz::BeFormula be = mlz::be_formula(m);
        const mlz::TransitionMatrix tm = mlz::probabilities(m, 0.3, 3e-5);
        const auto ro = mlz::reorder_descending(m);
        const int top = ro.permutation.front();
        const int bottom = ro.permutation.back();
        const double d_top = std::abs(tm.values(top, top) - be.top(0.3));
        const double d_bot = std::abs(tm.values(bottom, bottom) - be.bottom(0.3));
        c.expect(d_top <= 1e-4, "model " + std::to_string(rep) +
                                    ": |P_top - BE| = " + fmt(d_top));
        c.expect(d_bot <= 1e-4, "model " + std::to_string(rep) +
                                    ": |P_bottom - BE| = " + fmt(d_bot));

        const mlz::SeriesCoefficients sc = mlz::series_matrix(mlz::lambda_matrix(ro.model));
        const double s1 = be.sum_top, sn = be.sum_bottom;
        const double e1 = std::abs(sc.p2(0, 0) + 2 * s1) +
                          std::abs(sc.p4(0, 0) - 2 * s1 * s1);
        const double en = std::abs(sc.p2(n - 1, n - 1) + 2 * sn) +
                          std::abs(sc.p4(n - 1, n - 1) - 2 * sn * sn);
        const double scale = std::max({1.0, 2 * s1 * s1, 2 * sn * sn});
        c.expect(e1 <= 1e-12 * scale && en <= 1e-12 * scale,
                 "model " + std::to_string(rep) + ": BE Taylor mismatch");
    }
    c.finish(180.0);
}

void criterion_4_q_oracle() {
    Criterion c("criterion 4: Q integral closed form vs quadrature, 50 triples");
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> mag(0.4, 3.0);
    std::uniform_int_distribution<int> coin(0, 1);

    // one representative per feasible sign pattern (all-negative cannot give a
    // positive sum), including the theta-term region alpha<0, a+b>0, a+g>0
    std::vector<std::array<double, 3>> triples = {
        {1.0, 1.0, 1.0},   {2.0, 2.0, -1.0}, {2.0, -1.0, 2.0}, {-1.0, 3.0, 2.0},
        {3.0, -1.0, -1.0}, {-1.0, 3.0, -1.0}, {-1.0, -1.0, 3.0}, {-0.6, 2.2, 1.7},
    };
    while (triples.size() < 50) {
        const double alpha = (coin(rng) ? 1 : -1) * mag(rng);
        const double beta = (coin(rng) ? 1 : -1) * mag(rng);
        const double gamma = (coin(rng) ? 1 : -1) * mag(rng);
        if (alpha + beta + gamma < 0.35) continue;
        if (std::abs(alpha + beta) < 0.35 || std::abs(alpha + gamma) < 0.35)
            continue;
        triples.push_back({alpha, beta, gamma});
    }

    int theta_covered = 0;
    bool sign_seen[2][2][2] = {};
    for (const auto& [alpha, beta, gamma] : triples) {
        const mlz::QTriple t(alpha, beta, gamma);
        if (alpha < 0 && alpha + beta > 0 && alpha + gamma > 0) ++theta_covered;
        sign_seen[alpha > 0][beta > 0][gamma > 0] = true;

        const mlz::Complex closed = mlz::q_closed_form(t);
        const mlz::Complex quad = mlz::q_quadrature(t, 1e-6);
        const double diff = std::abs(closed - quad);
        c.expect(diff <= 1e-4, "triple (" + fmt(alpha) + ", " + fmt(beta) + ", " +
                                   fmt(gamma) + "): |diff| = " + fmt(diff));
    }
    c.expect(theta_covered >= 2, "theta-term region undersampled");
    int patterns = 0;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int g = 0; g < 2; ++g) patterns += sign_seen[a][b][g];
    c.expect(patterns >= 7, "sign patterns covered: " + std::to_string(patterns));
    c.finish(120.0);
}

void criterion_5_resonant_limit() {
    Criterion c("criterion 5: resonant limit R, recursion vs closed form");
    struct Quad {
        const char* model;
        int j, k, l, p;
    };
    const std::vector<Quad> quads = {
        {"fig2", 0, 2, 1, 0}, {"fig2", 0, 2, 2, 0}, {"fig2", 0, 1, 1, 2},
        {"fig2", 0, 2, 2, 1}, {"fig2", 1, 2, 2, 0}, {"4state", 0, 3, 1, 0},
        {"4state", 0, 3, 2, 0}, {"4state", 1, 3, 3, 2}, {"4state", 0, 2, 2, 3},
        {"4state", 1, 2, 2, 0},
    };
    const mlz::Model fig2 = fig2_model();
    const mlz::Model four = four_state_model();
    for (const Quad& q : quads) {
        const mlz::Model& m = std::string(q.model) == "fig2" ? fig2 : four;
        const mlz::LambdaMatrix lam = mlz::lambda_matrix(m);
        const double numax =
            0.5 * std::abs(m.slopes().front() - m.slopes().back());
        std::vector<double> grid;
        for (double u = 0.5 / numax; u <= 45.0 * 45.0; u += 0.5 / numax)
            grid.push_back(std::sqrt(u));
        const double want = mlz::resonant_r(lam, m.slopes(), q.j, q.k, q.l, q.p);
        const double got = mlz::resonant_limit_check(m, q.j, q.k, q.l, q.p, grid);
        c.expect(std::abs(got - want) <= 1e-3,
                 std::string(q.model) + " (" + std::to_string(q.j + 1) + "," +
                     std::to_string(q.k + 1) + "," + std::to_string(q.l + 1) +
                     "," + std::to_string(q.p + 1) + "): recursion " + fmt(got) +
                     " vs closed " + fmt(want));
    }
    c.finish(300.0);
}

void criterion_6_stochasticity_parity() {
    Criterion c("criterion 6: coefficient stochasticity and parity, 100 draws");
    std::mt19937 rng(4242);
    std::uniform_int_distribution<int> nd(2, 6);
    for (int rep = 0; rep < 100; ++rep) {
        const mlz::LambdaMatrix lam = testutil::random_lambda(rng, nd(rng));
        const mlz::SeriesCoefficients sc = mlz::series_matrix(lam);
        const double scale =
            std::max({sc.p2.cwiseAbs().maxCoeff(), sc.p3.cwiseAbs().maxCoeff(),
                      sc.p4.cwiseAbs().maxCoeff(), 1.0});
        for (const auto* mat : {&sc.p2, &sc.p3, &sc.p4}) {
            c.expect(mat->rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12 * scale,
                     "row sums exceed 1e-12 (draw " + std::to_string(rep) + ")");
            c.expect(mat->colwise().sum().cwiseAbs().maxCoeff() <= 1e-12 * scale,
                     "column sums exceed 1e-12 (draw " + std::to_string(rep) + ")");
        }
        c.expect((sc.p3 + sc.p3.transpose()).cwiseAbs().maxCoeff() == 0.0,
                 "p3 not exactly antisymmetric");
        c.expect((sc.p2 - sc.p2.transpose()).cwiseAbs().maxCoeff() == 0.0 &&
                     (sc.p4 - sc.p4.transpose()).cwiseAbs().maxCoeff() == 0.0,
                 "p2/p4 not exactly symmetric");
        if (!c.ok_) break;
    }
    c.finish(60.0);
}

void criterion_7_five_state() {
    Criterion c("criterion 7: 5-level chain coefficients and numerics");
    const mlz::Model m = ssh5_model();
    const double b1 = 0.7, b2 = 1.9;
    const double l12 = 1.0 * std::sqrt(M_PI / (b2 - b1));
    const double l13 = 0.8 * std::sqrt(M_PI / b1);
    const double l14 = 0.6 * std::sqrt(M_PI / (b1 + b2));

    const mlz::SeriesCoefficients sc = mlz::series_for_model(m);
    auto close = [](double a, double b) {
        return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
    };
    c.expect(sc.p2(2, 1) == 0.0 && sc.p3(2, 1) == 0.0,
             "P(3,2) should start at 4th order");
    c.expect(close(sc.p4(2, 1), l13 * l13 * (l12 * l12 + l14 * l14)),
             "P4(3,2) = " + fmt(sc.p4(2, 1)) + " vs lambda expression " +
                 fmt(l13 * l13 * (l12 * l12 + l14 * l14)));
    c.expect(close(sc.p2(2, 2), -4 * l13 * l13), "P2(3,3) mismatch");
    c.expect(close(sc.p4(2, 2), 2 * l13 * l13 * (3 * l13 * l13 + 2 * l14 * l14)),
             "P4(3,3) mismatch");

    // numeric probabilities at g = 0.1 agree with the truncated series to
    // C g^5, with C taken from the ratio scan
    const std::vector<double> grid{0.05, 0.0707, 0.1};
    const mlz::ResidualScan scan = mlz::residual_scan(m, grid, sc, 1e-10);
    double cbound = 0.0;
    for (int j = 0; j < 5; ++j)
        for (int k = 0; k < 5; ++k) {
            if (scan.status[0](j, k) != 0) continue;
            cbound = std::max(cbound, std::abs(scan.ratios[0](j, k)));
        }
    const double C = 2.0 * cbound + 1.0;
    const double g = 0.1;
    const Eigen::MatrixXd dp = scan.residuals[2];
    const double worst = dp.cwiseAbs().maxCoeff();
    c.expect(worst <= C * std::pow(g, 5),
             "|dP(0.1)| = " + fmt(worst) + " vs C g^5 = " + fmt(C * std::pow(g, 5)));
    c.finish(300.0);
}

void criterion_8_w_parity() {
    Criterion c("criterion 8: W recursion parity suite");
    const mlz::Model m = fig2_model();
    const double tol = 1e-9;
    for (double t : {1.0, 3.0, 10.0}) {
        for (int order : {1, 2, 3}) {
            const mlz::WMatrix w = mlz::w_n_finite(m, order, t, tol);
            const double sign = (order % 2 == 0) ? 1.0 : -1.0;
            const double parity =
                (w.values - sign * w.values.adjoint()).cwiseAbs().maxCoeff();
            c.expect(parity <= 10.0 * tol,
                     "t = " + fmt(t) + ", W" + std::to_string(order) +
                         ": parity residual " + fmt(parity));
        }
        const double p1 = mlz::pn_finite(m, 1, t, tol).diagonal().cwiseAbs().maxCoeff();
        const double p3 = mlz::pn_finite(m, 3, t, tol).diagonal().cwiseAbs().maxCoeff();
        c.expect(p1 <= 10.0 * tol, "t = " + fmt(t) + ": P1 diagonal " + fmt(p1));
        c.expect(p3 <= 10.0 * tol, "t = " + fmt(t) + ": P3 diagonal " + fmt(p3));
    }
    c.finish(60.0);
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, void (*)()>> criteria = {
        {"criterion 1", &criterion_1_lz_closed_loop},
        {"criterion 2", &criterion_2_fig2_reproduction},
        {"criterion 3", &criterion_3_be_cross_check},
        {"criterion 4", &criterion_4_q_oracle},
        {"criterion 5", &criterion_5_resonant_limit},
        {"criterion 6", &criterion_6_stochasticity_parity},
        {"criterion 7", &criterion_7_five_state},
        {"criterion 8", &criterion_8_w_parity},
    };
    for (const auto& [name, fn] : criteria) {
        try {
            fn();
        } catch (const std::exception& e) {
            std::printf("[FAIL] %s aborted: %s\n", name, e.what());
            ++g_failures;
        }
    }
    if (g_failures == 0) std::printf("all acceptance criteria passed\n");
    else std::printf("%d acceptance criteria FAILED\n", g_failures);
    return g_failures;
}
