#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "mlz/errors.hpp"

namespace mlz {

/// One-crossing multistate Landau-Zener model: N diabatic levels with linear
/// energies b_j * t that all cross at (t, E) = (0, 0), a constant real
/// symmetric coupling matrix A (zero diagonal), and an overall coupling
/// strength g multiplying A.
///
/// Instances are immutable after construction and safe to share across
/// threads. Slopes are stored exactly as given; nothing is reordered.
class Model {
public:
    /// Validates and builds a model. Throws DuplicateSlopeError,
    /// AsymmetricCouplingError, NonzeroDiagonalError or
    /// DimensionMismatchError. Slope equality is tested with exact floating
    /// comparison: the closed forms genuinely diverge as b_j - b_k -> 0, so
    /// near-degenerate slopes are the caller's responsibility.
    Model(std::vector<double> slopes, Eigen::MatrixXd couplings,
          double g = 1.0, std::string label = {});

    int n() const { return static_cast<int>(slopes_.size()); }
    const std::vector<double>& slopes() const { return slopes_; }
    const Eigen::MatrixXd& couplings() const { return couplings_; }
    double g() const { return g_; }
    const std::string& label() const { return label_; }

    /// True if slopes are already strictly descending.
    bool is_descending() const;

    bool operator==(const Model& other) const;

private:
    std::vector<double> slopes_;
    Eigen::MatrixXd couplings_;
    double g_;
    std::string label_;
};

/// Convenience factory mirroring the constructor.
Model make_model(std::vector<double> slopes, Eigen::MatrixXd couplings,
                 double g = 1.0, std::string label = {});

/// The combinations lambda_jk = A_jk * sqrt(pi / |b_j - b_k|) in which all
/// closed-form results are expressed. Symmetric, zero diagonal, same sign
/// pattern as the couplings. Indices refer to the model the matrix was
/// derived from; the closed-form series additionally assume that model is in
/// descending slope order.
struct LambdaMatrix {
    int n = 0;
    Eigen::MatrixXd values;
};

/// A model together with the permutation that sorted it.
/// permutation[i] is the original (0-based) index of the level that ends up
/// at sorted position i. sorted_of[orig] gives the inverse lookup.
struct ReorderedModel {
    Model model;
    std::vector<int> permutation;
    std::vector<int> sorted_of;
};

/// Returns the same physical model with slopes strictly descending and
/// couplings permuted consistently. Throws DuplicateSlopeError if two slopes
/// compare equal. Idempotent: reordering a descending model yields the
/// identity permutation.
ReorderedModel reorder_descending(const Model& model);

/// lambda_jk = A_jk * sqrt(pi / |b_j - b_k|), zero diagonal. Note that
/// lambda_jk blows up like |b_j - b_k|^{-1/2} as slopes approach each other.
/// Requires a strictly descending model (the order is what the series
/// formulas key on); throws ValidationError otherwise.
LambdaMatrix lambda_matrix(const Model& model);

/// Parses the key-value model file format (see docs/model-format.md).
/// Throws ParseError with a 1-based line/column on syntax errors and the
/// usual validation errors on semantic ones.
Model parse_model(const std::string& text);

/// Canonical text form; parse(serialize(m)) == m, and
/// serialize(parse(serialize(m))) == serialize(m).
std::string serialize_model(const Model& model);

/// FNV-1a 64-bit hash of the canonical serialization, as fixed-width hex.
/// Used by the CLI to stamp outputs with the model identity.
std::string model_hash(const Model& model);

}  // namespace mlz
