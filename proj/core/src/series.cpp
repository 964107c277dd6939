#include "mlz/series.hpp"

#include <cmath>

namespace mlz {

namespace {

void check_pair(const LambdaMatrix& lambda, int j, int k) {
    if (j < 0 || k < 0 || j >= lambda.n || k >= lambda.n)
        throw IndexError("level index out of range");
    if (!(j < k)) throw IndexError("off-diagonal coefficients require j < k");
}

}  // namespace

double p2_offdiag(const LambdaMatrix& lambda, int j, int k) {
    check_pair(lambda, j, k);
    const double l = lambda.values(j, k);
    return 2.0 * l * l;
}

double p3_offdiag(const LambdaMatrix& lambda, int j, int k) {
    check_pair(lambda, j, k);
    const auto& lam = lambda.values;
    double interior = 0.0, exterior = 0.0;
    for (int l = 0; l < lambda.n; ++l) {
        if (l == j || l == k) continue;
        const double prod = lam(j, l) * lam(l, k);
        if (j < l && l < k) interior += prod;
        else exterior += prod;
    }
    return 2.0 * lam(j, k) * (interior - exterior);
}

double p4_offdiag(const LambdaMatrix& lambda, int j, int k) {
    check_pair(lambda, j, k);
    const auto& lam = lambda.values;
    const int n = lambda.n;
    const double ljk = lam(j, k);

    double interior = 0.0, exterior = 0.0;
    double one_index = 2.0 * ljk * ljk;
    for (int l = 0; l < n; ++l) {
        if (l != j && l != k) {
            const double prod = lam(j, l) * lam(l, k);
            if (j < l && l < k) interior += prod;
            else exterior += prod;
        }
        if (l != k) {
            const double jl2 = lam(j, l) * lam(j, l);
            one_index += (l < k ? 1.0 : 3.0) * jl2;
        }
        if (l != j) {
            const double lk2 = lam(l, k) * lam(l, k);
            one_index += (l > j ? 1.0 : 3.0) * lk2;
        }
    }

    // Four-index chains j-l-p-k. Only sign-balanced chains survive (exactly
    // two of j<l, l<p, p<k). Each carries weight 1 from the symmetric cube
    // term; the oscillatory-integral corrections subtract 2 on the
    // step-function branch and -sgn(b_lp) when the principal-value argument
    // lands on a cut, which happens exactly when l and p are both interior
    // or both exterior to (j, k).
    double patterns = 0.0;
    for (int l = 0; l < n; ++l) {
        if (l == j || l == k) continue;
        for (int p = 0; p < n; ++p) {
            if (p == j || p == k || p == l) continue;
            const int s1 = j < l ? 1 : -1;
            const int s2 = l < p ? 1 : -1;
            const int s3 = p < k ? 1 : -1;
            if (s1 + s2 + s3 != 1) continue;
            double w = 1.0;
            if (p < l && j < p && l < k) w -= 2.0;
            const bool l_interior = j < l && l < k;
            const bool p_interior = j < p && p < k;
            if (l_interior == p_interior) w -= static_cast<double>(s2);  // sgn(b_lp)
            if (w != 0.0) patterns += w * lam(j, l) * lam(l, p) * lam(p, k);
        }
    }

    return exterior * exterior + interior * interior -
           ljk * ljk * one_index - 2.0 * ljk * patterns;
}

SeriesCoefficients series_matrix(const LambdaMatrix& lambda) {
    const int n = lambda.n;
    SeriesCoefficients sc;
    sc.n = n;
    sc.p2 = Eigen::MatrixXd::Zero(n, n);
    sc.p3 = Eigen::MatrixXd::Zero(n, n);
    sc.p4 = Eigen::MatrixXd::Zero(n, n);

    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const double p2 = p2_offdiag(lambda, j, k);
            const double p3 = p3_offdiag(lambda, j, k);
            const double p4 = p4_offdiag(lambda, j, k);
            sc.p2(j, k) = p2;
            sc.p2(k, j) = p2;
            sc.p3(j, k) = p3;
            sc.p3(k, j) = -p3;
            sc.p4(j, k) = p4;
            sc.p4(k, j) = p4;
        }
    }
    // diagonals from double stochasticity of each order
    for (int j = 0; j < n; ++j) {
        double s2 = 0.0, s4 = 0.0;
        for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            s2 += sc.p2(j, k);
            s4 += sc.p4(j, k);
        }
        sc.p2(j, j) = -s2;
        sc.p4(j, j) = -s4;
    }
    return sc;
}

SeriesCoefficients series_for_model(const Model& model) {
    const ReorderedModel ro = reorder_descending(model);
    const SeriesCoefficients sorted = series_matrix(lambda_matrix(ro.model));
    const int n = model.n();
    SeriesCoefficients out;
    out.n = n;
    out.p2.resize(n, n);
    out.p3.resize(n, n);
    out.p4.resize(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const int sa = ro.sorted_of[a];
            const int sb = ro.sorted_of[b];
            out.p2(a, b) = sorted.p2(sa, sb);
            out.p3(a, b) = sorted.p3(sa, sb);
            out.p4(a, b) = sorted.p4(sa, sb);
        }
    }
    return out;
}

Eigen::MatrixXd evaluate_at(const SeriesCoefficients& coeffs, double g) {
    const double g2 = g * g;
    return Eigen::MatrixXd::Identity(coeffs.n, coeffs.n) + g2 * coeffs.p2 +
           g2 * g * coeffs.p3 + g2 * g2 * coeffs.p4;
}

BeFormula be_formula(const Model& model) {
    const ReorderedModel ro = reorder_descending(model);
    const LambdaMatrix lam = lambda_matrix(ro.model);
    BeFormula be;
    const int n = lam.n;
    for (int l = 0; l < n; ++l) {
        be.sum_top += lam.values(0, l) * lam.values(0, l);
        be.sum_bottom += lam.values(l, n - 1) * lam.values(l, n - 1);
    }
    return be;
}

Eigen::Matrix2d lz_exact(double lambda12, double g) {
    const double gl = g * lambda12;
    const double stay = std::exp(-2.0 * gl * gl);
    Eigen::Matrix2d m;
    m << stay, 1.0 - stay, 1.0 - stay, stay;
    return m;
}

}  // namespace mlz
