#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mlz/model.hpp"
#include "mlz/series.hpp"

namespace mlz {

/// Numerically converged infinite-time transition probabilities.
/// Entries lie in [-est_error, 1+est_error]; every row and column sums to 1
/// within a few est_error (double stochasticity).
struct TransitionMatrix {
    int n = 0;
    Eigen::MatrixXd values;
    double est_error = 0.0;
    double t_final = 0.0;   // largest time the ladder actually reached
    double solver_rtol = 0.0;
};

/// Evolution operator W(t_final) of the phase-stripped picture
///   i dW/dt = g { A~(t), W },  W(0) = 1,
/// which propagates the symmetric-time evolution U(t, -t); |W_jk|^2 are the
/// finite-time transition probabilities. Integration runs in t up to t = 1
/// and in u = t^2 beyond, where the phases b_jk u / 2 oscillate at constant
/// frequency. tol is the accuracy budget; the embedded RKF78 pair runs
/// tighter internally so that the final unitarity defect stays below 10 tol.
/// Throws StepSizeUnderflow or NonUnitaryDrift.
Eigen::MatrixXcd propagate(const Model& model, double g, double t_final,
                           double tol);

/// Infinite-time probabilities: one integration pass over a geometric ladder
/// of horizons u_l = u_0 2^l, Hann-windowed averages of |W_jk(t)|^2 over the
/// trailing 40% of each level (in u), and a 1/u extrapolation across levels.
/// The ladder grows until the certified est_error drops below tol or the
/// level budget runs out (NoConvergence).
TransitionMatrix probabilities(const Model& model, double g, double tol);

/// Per-entry status of a residual-scan ratio.
enum class ScanStatus : int {
    Ok = 0,
    PrecisionFloor = 1,  // |dP| < 100 est_error, ratio meaningless
};

/// Order-certification scan: residuals dP = P_numeric - P_series(g) and the
/// ratios dP / g^5 (off-diagonal) and dP / g^6 (diagonal) across a g grid.
/// An entry "passes" when the ratios at the two smallest unfloored g agree
/// within `band` (the series truncation error is then provably O(g^5)/O(g^6)).
struct ResidualScan {
    std::vector<double> g_values;
    int order = 4;                            // subtraction order
    std::vector<Eigen::MatrixXd> probabilities;  // numeric P per g
    std::vector<Eigen::MatrixXd> residuals;      // dP per g
    std::vector<Eigen::MatrixXd> ratios;         // dP/g^m per g
    std::vector<Eigen::MatrixXi> status;         // ScanStatus per entry per g
    std::vector<double> est_errors;              // per g
    Eigen::MatrixXi ratio_stable;                // per-entry summary (0/1)
    double band = 0.25;
};

/// Runs probabilities() across g_values (in parallel; MLZ_THREADS caps the
/// worker count) and assembles the scan. tol sets the baseline certification
/// target; small g sharpen it to ~0.01 g^5 so the ratios stay resolved.
/// Deterministic: results are reduced in grid order regardless of scheduling.
ResidualScan residual_scan(const Model& model, const std::vector<double>& g_values,
                           const SeriesCoefficients& coeffs, double tol,
                           double band = 0.25);

}  // namespace mlz
