#pragma once

// Smooth convex losses consumed by the solvers through a small contract:
// value(x), gradient(x), plus curvature(d) = dᵀ∇²f d for quadratic losses
// (used by exact line search) and smoothness_bound() for the default step.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <string>
#include <tuple>
#include <vector>

#include "acciht/errors.hpp"
#include "acciht/numerics.hpp"

namespace acciht {

template <class O>
concept Objective = requires(const O& o, const typename O::signal_type& x) {
  typename O::signal_type;
  { o.value(x) } -> std::convertible_to<double>;
  { o.gradient(x) } -> std::convertible_to<typename O::signal_type>;
};

/// Objectives with constant Hessian H; curvature(d) returns dᵀHd.
template <class O>
concept QuadraticObjective = Objective<O> && requires(const O& o, const typename O::signal_type& d) {
  { o.curvature(d) } -> std::convertible_to<double>;
};

template <class O>
concept HasSmoothnessBound = requires(const O& o) {
  { o.smoothness_bound() } -> std::convertible_to<double>;
};

/// f(x) = ½‖b − Φx‖².
class LeastSquares {
public:
  using signal_type = Vector;

  LeastSquares(Matrix phi, Vector b) : phi_(std::move(phi)), b_(std::move(b)) {
    detail::require(phi_.rows() == b_.size(), "LeastSquares: Phi has " + std::to_string(phi_.rows()) +
                                                  " rows but b has " + std::to_string(b_.size()) + " entries");
    detail::require(all_finite(phi_) && all_finite(b_), "LeastSquares: non-finite data");
  }

  const Matrix& design() const { return phi_; }
  const Vector& observations() const { return b_; }
  Index dimension() const { return phi_.cols(); }

  void check_shape(const Vector& x) const {
    detail::require(x.size() == phi_.cols(), "LeastSquares: signal length mismatch");
  }

  Vector residual(const Vector& x) const {
    check_shape(x);
    return b_ - phi_ * x;
  }

  double value(const Vector& x) const { return 0.5 * residual(x).squaredNorm(); }

  Vector gradient(const Vector& x) const { return -(phi_.transpose() * residual(x)); }

  double curvature(const Vector& d) const {
    check_shape(d);
    return (phi_ * d).squaredNorm();
  }

  /// β̂ = λ_max(ΦᵀΦ).
  double smoothness_bound() const { return gram_lambda_max(phi_); }

private:
  Matrix phi_;
  Vector b_;
};

/// One observed matrix entry (0-based).
struct MaskEntry {
  Index row;
  Index col;
  friend auto operator<=>(const MaskEntry&, const MaskEntry&) = default;
};

/// f(X) = ½ Σ_{(i,j) observed} (b_ij − X_ij)². Observations are kept sorted
/// by (row, col).
class MaskedLeastSquares {
public:
  using signal_type = Matrix;

  MaskedLeastSquares(Index rows, Index cols, std::vector<MaskEntry> positions, Vector values)
      : rows_(rows), cols_(cols) {
    detail::require(rows >= 1 && cols >= 1, "MaskedLeastSquares: dimensions must be positive");
    detail::require(static_cast<Index>(positions.size()) == values.size(),
                    "MaskedLeastSquares: mask and value counts differ");
    detail::require(all_finite(values), "MaskedLeastSquares: non-finite observations");
    std::vector<std::size_t> order(positions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return positions[a] < positions[b]; });
    positions_.reserve(positions.size());
    values_.resize(values.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& p = positions[order[i]];
      detail::require(p.row >= 0 && p.row < rows && p.col >= 0 && p.col < cols,
                      "MaskedLeastSquares: mask position out of range");
      detail::require(i == 0 || positions_.back() != p, "MaskedLeastSquares: duplicate mask position");
      positions_.push_back(p);
      values_(static_cast<Index>(i)) = values(static_cast<Index>(order[i]));
    }
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  const std::vector<MaskEntry>& positions() const { return positions_; }
  const Vector& observations() const { return values_; }
  Index observed_count() const { return values_.size(); }

  void check_shape(const Matrix& x) const {
    detail::require(x.rows() == rows_ && x.cols() == cols_, "MaskedLeastSquares: signal shape mismatch");
  }

  /// The mask operator M(X).
  Vector sample(const Matrix& x) const {
    check_shape(x);
    Vector out(observed_count());
    for (std::size_t i = 0; i < positions_.size(); ++i)
      out(static_cast<Index>(i)) = x(positions_[i].row, positions_[i].col);
    return out;
  }

  double value(const Matrix& x) const { return 0.5 * (values_ - sample(x)).squaredNorm(); }

  Matrix gradient(const Matrix& x) const {
    check_shape(x);
    Matrix g = Matrix::Zero(rows_, cols_);
    for (std::size_t i = 0; i < positions_.size(); ++i) {
      const auto& p = positions_[i];
      g(p.row, p.col) = x(p.row, p.col) - values_(static_cast<Index>(i));
    }
    return g;
  }

  double curvature(const Matrix& d) const { return sample(d).squaredNorm(); }

  /// The mask is a coordinate selection, so its Hessian has norm 1.
  double smoothness_bound() const { return observed_count() > 0 ? 1.0 : 0.0; }

private:
  Index rows_;
  Index cols_;
  std::vector<MaskEntry> positions_;
  Vector values_;
};

/// f(x) = Σ log(1 + exp(−yᵢ⟨φᵢ, x⟩)) + (λ/2)‖x‖², labels in {−1, +1}.
class LogisticL2 {
public:
  using signal_type = Vector;

  LogisticL2(Matrix features, Vector labels, double lambda)
      : features_(std::move(features)), labels_(std::move(labels)), lambda_(lambda) {
    detail::require(features_.rows() == labels_.size(), "LogisticL2: feature/label count mismatch");
    detail::require(lambda_ >= 0.0 && std::isfinite(lambda_), "LogisticL2: lambda must be finite and >= 0");
    detail::require(all_finite(features_), "LogisticL2: non-finite features");
    for (Index i = 0; i < labels_.size(); ++i)
      detail::require(labels_(i) == 1.0 || labels_(i) == -1.0, "LogisticL2: labels must be +1 or -1");
  }

  const Matrix& features() const { return features_; }
  const Vector& labels() const { return labels_; }
  double lambda() const { return lambda_; }

  void check_shape(const Vector& x) const {
    detail::require(x.size() == features_.cols(), "LogisticL2: signal length mismatch");
  }

  static double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

  double value(const Vector& x) const {
    check_shape(x);
    const Vector margins = labels_.cwiseProduct(features_ * x);
    double loss = 0.0;
    for (Index i = 0; i < margins.size(); ++i) loss += softplus(-margins(i));
    return loss + 0.5 * lambda_ * x.squaredNorm();
  }

  Vector gradient(const Vector& x) const {
    check_shape(x);
    const Vector margins = labels_.cwiseProduct(features_ * x);
    Vector w(margins.size());
    for (Index i = 0; i < margins.size(); ++i) {
      // σ(−m) written to avoid overflow for large |m|.
      const double m = margins(i);
      const double s = m >= 0.0 ? std::exp(-m) / (1.0 + std::exp(-m)) : 1.0 / (1.0 + std::exp(m));
      w(i) = -labels_(i) * s;
    }
    return features_.transpose() * w + lambda_ * x;
  }

  double smoothness_bound() const { return 0.25 * gram_lambda_max(features_) + lambda_; }

private:
  Matrix features_;
  Vector labels_;
  double lambda_;
};

/// ∇f(x) restricted to `support` under `model`.
template <Objective O, class Model>
typename O::signal_type gradient_restricted(const O& obj, const typename O::signal_type& x,
                                            const typename Model::support_type& support, const Model& model) {
  return model.restrict(obj.gradient(x), support);
}

} // namespace acciht
