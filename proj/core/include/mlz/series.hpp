#pragma once

#include <Eigen/Dense>

#include "mlz/model.hpp"

namespace mlz {

/// Probability expansion coefficients in powers of g, stored at g = 1 in
/// lambda units (g can always be absorbed into the couplings):
///   P_jk(g) = delta_jk + p2_jk g^2 + p3_jk g^3 + p4_jk g^4 + O(g^5).
/// p2 and p4 are symmetric, p3 antisymmetric; every row and column of each
/// sums to zero (order-by-order double stochasticity).
struct SeriesCoefficients {
    int n = 0;
    Eigen::MatrixXd p2;
    Eigen::MatrixXd p3;
    Eigen::MatrixXd p4;
};

/// P_{2,jk} = 2 lambda_jk^2 for 0 <= j < k. Throws IndexError otherwise.
double p2_offdiag(const LambdaMatrix& lambda, int j, int k);

/// P_{3,jk} = 2 lambda_jk (sum_{j<l<k} - sum_{l<j or l>k}) lambda_jl lambda_lk.
double p3_offdiag(const LambdaMatrix& lambda, int j, int k);

/// Full 4th-order coefficient for j < k: squared exterior and interior sums,
/// minus lambda_jk^2 times the weighted one-index sums (weights 1/3/1/3 over
/// the l<k, l>k, l>j, l<j partitions plus 2 lambda_jk^2), minus
/// 2 lambda_jk times the weighted ordered-pattern sums of
/// lambda_jl lambda_lp lambda_pk over sign-balanced chains: weight 2 for
/// p<j<k<l, weight 1 for p<j<l<k, j<p<k<l, l<j<p<k and j<l<k<p, weight 0
/// otherwise. The weights are pinned by the direct recursion route (see the
/// wengine tests): each chain gets 1 from the symmetric cube term, minus the
/// step-function branch (2, on p<l with j<p and l<k), minus sgn(b_lp) when
/// the arctangent argument sits on a branch cut, i.e. when l and p are both
/// interior or both exterior to (j, k).
double p4_offdiag(const LambdaMatrix& lambda, int j, int k);

/// Assembles the three coefficient matrices: j > k entries by the even/odd
/// symmetry (p2/p4 symmetric, p3 antisymmetric), diagonals from double
/// stochasticity (p3 diagonal is identically zero).
SeriesCoefficients series_matrix(const LambdaMatrix& lambda);

/// Reorders the model, computes the series, and maps the coefficients back
/// to the original level labels.
SeriesCoefficients series_for_model(const Model& model);

/// Truncated probability matrix delta_jk + p2 g^2 + p3 g^3 + p4 g^4.
/// Rows and columns sum to exactly 1 by the coefficient identities; entries
/// may leave [0,1] once g is large (flagged by callers, never clamped).
Eigen::MatrixXd evaluate_at(const SeriesCoefficients& coeffs, double g);

/// Brundobler-Elser exact survival probabilities of the extremal-slope
/// levels: P_top(g) = exp(-2 g^2 sum_l lambda_{1l}^2) and similarly for the
/// steepest-descending level. Exact at any g.
struct BeFormula {
    double sum_top = 0.0;     // sum_l lambda_{1l}^2 in sorted order
    double sum_bottom = 0.0;  // sum_l lambda_{lN}^2
    double top(double g) const { return std::exp(-2.0 * g * g * sum_top); }
    double bottom(double g) const { return std::exp(-2.0 * g * g * sum_bottom); }
};

BeFormula be_formula(const Model& model);

/// Exact two-level Landau-Zener transition matrix:
/// P11 = P22 = exp(-2 (g lambda12)^2), P12 = P21 = 1 - P11.
Eigen::Matrix2d lz_exact(double lambda12, double g);

}  // namespace mlz
