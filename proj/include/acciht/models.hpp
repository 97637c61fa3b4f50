#pragma once

// Structure models: plain sparsity, non-overlapping block sparsity and
// low rank. Each model owns its budget and provides the exact projection
// onto "at most k atoms", support extraction, restriction to a support and
// the union of supports used by the support-expansion step.
//
// Ties in magnitude (or group energy) are broken towards the lowest index,
// so every routine here is deterministic.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "acciht/errors.hpp"
#include "acciht/numerics.hpp"

namespace acciht {

/// Sorted, duplicate-free set of ids. Tagged so coordinate and group
/// supports cannot be mixed up.
template <class Tag>
struct IdSet {
  std::vector<Index> ids;

  IdSet() = default;
  explicit IdSet(std::vector<Index> v) : ids(std::move(v)) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }

  Index size() const { return static_cast<Index>(ids.size()); }
  bool empty() const { return ids.empty(); }
  bool contains(Index i) const { return std::binary_search(ids.begin(), ids.end(), i); }
  friend bool operator==(const IdSet&, const IdSet&) = default;
};

struct CoordinateTag;
struct GroupTag;
using CoordinateSupport = IdSet<CoordinateTag>;
using GroupSupport = IdSet<GroupTag>;

/// Low-rank support: orthonormal bases for a column space and a row space.
/// The associated subspace of matrices is { L·C·Rᵀ }.
struct SubspaceSupport {
  Matrix left;   // rows x a
  Matrix right;  // cols x b

  Index size() const { return std::max(left.cols(), right.cols()); }
  bool empty() const { return left.cols() == 0 || right.cols() == 0; }
};

namespace detail {

template <class Tag>
IdSet<Tag> set_union(const IdSet<Tag>& a, const IdSet<Tag>& b) {
  std::vector<Index> out;
  out.reserve(a.ids.size() + b.ids.size());
  std::set_union(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(), std::back_inserter(out));
  IdSet<Tag> s;
  s.ids = std::move(out);
  return s;
}

/// Indices of the `k` largest scores, ties to the lowest index, returned sorted.
inline std::vector<Index> top_k(const Vector& scores, Index k) {
  std::vector<Index> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), Index{0});
  k = std::min<Index>(k, scores.size());
  auto better = [&](Index a, Index b) {
    return scores(a) > scores(b) || (scores(a) == scores(b) && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
  order.resize(static_cast<std::size_t>(k));
  std::sort(order.begin(), order.end());
  return order;
}

inline void require_finite(const auto& x, const char* what) {
  require(all_finite(x), std::string(what) + ": non-finite entries");
}

} // namespace detail

/// ‖x‖₀ ≤ k over ℝⁿ.
class SparseModel {
public:
  using signal_type = Vector;
  using support_type = CoordinateSupport;

  SparseModel(Index n, Index k) : n_(n), k_(k) {
    detail::require(n >= 1, "SparseModel: dimension must be positive");
    detail::require(k >= 1 && k <= n, "SparseModel: need 1 <= k <= n");
  }

  Index dimension() const { return n_; }
  Index budget() const { return k_; }
  SparseModel with_budget(Index k) const { return {n_, k}; }

  void check_shape(const Vector& x) const {
    detail::require(x.size() == n_, "SparseModel: signal length " + std::to_string(x.size()) +
                                        " does not match dimension " + std::to_string(n_));
  }

  Vector project(const Vector& x) const {
    check_shape(x);
    return restrict(x, support_of(x));
  }

  /// Support of the projection; padded with the lowest free indices when x
  /// has fewer than k nonzeros.
  CoordinateSupport support_of(const Vector& x) const {
    check_shape(x);
    detail::require_finite(x, "SparseModel::support_of");
    CoordinateSupport s;
    s.ids = detail::top_k(x.cwiseAbs(), k_);
    return s;
  }

  /// Exact set of nonzero coordinates (no budget applied).
  CoordinateSupport active_support(const Vector& x) const {
    check_shape(x);
    CoordinateSupport s;
    for (Index i = 0; i < x.size(); ++i)
      if (x(i) != 0.0) s.ids.push_back(i);
    return s;
  }

  Index cardinality(const Vector& x) const { return active_support(x).size(); }

  Vector restrict(const Vector& x, const CoordinateSupport& s) const {
    check_shape(x);
    Vector out = Vector::Zero(n_);
    for (Index i : s.ids) {
      detail::require(i >= 0 && i < n_, "SparseModel::restrict: index out of range");
      out(i) = x(i);
    }
    return out;
  }

  Vector restrict_complement(const Vector& x, const CoordinateSupport& s) const {
    return x - restrict(x, s);
  }

  CoordinateSupport unite(const CoordinateSupport& a, const CoordinateSupport& b) const {
    return detail::set_union(a, b);
  }

  CoordinateSupport full_support() const {
    std::vector<Index> all(static_cast<std::size_t>(n_));
    std::iota(all.begin(), all.end(), Index{0});
    return CoordinateSupport(std::move(all));
  }

  std::vector<Index> coordinates(const CoordinateSupport& s) const { return s.ids; }

private:
  Index n_;
  Index k_;
};

/// At most k active groups out of a fixed partition of [n].
class BlockModel {
public:
  using signal_type = Vector;
  using support_type = GroupSupport;

  BlockModel(std::vector<std::vector<Index>> groups, Index k) : groups_(std::move(groups)), k_(k) {
    detail::require(!groups_.empty(), "BlockModel: no groups");
    detail::require(k >= 1 && k <= static_cast<Index>(groups_.size()),
                    "BlockModel: need 1 <= k <= number of groups");
    n_ = 0;
    for (auto& g : groups_) {
      detail::require(!g.empty(), "BlockModel: empty group");
      std::sort(g.begin(), g.end());
      n_ += static_cast<Index>(g.size());
    }
    std::vector<int> seen(static_cast<std::size_t>(n_), 0);
    for (const auto& g : groups_)
      for (Index i : g) {
        detail::require(i >= 0 && i < n_, "BlockModel: groups must partition [n]");
        detail::require(seen[static_cast<std::size_t>(i)]++ == 0, "BlockModel: groups overlap");
      }
  }

  Index dimension() const { return n_; }
  Index budget() const { return k_; }
  Index group_count() const { return static_cast<Index>(groups_.size()); }
  const std::vector<std::vector<Index>>& groups() const { return groups_; }
  BlockModel with_budget(Index k) const { return {groups_, k}; }

  void check_shape(const Vector& x) const {
    detail::require(x.size() == n_, "BlockModel: signal length " + std::to_string(x.size()) +
                                        " does not match dimension " + std::to_string(n_));
  }

  Vector group_energies(const Vector& x) const {
    Vector e(group_count());
    for (Index g = 0; g < group_count(); ++g) {
      double s = 0.0;
      for (Index i : groups_[static_cast<std::size_t>(g)]) s += x(i) * x(i);
      e(g) = s;
    }
    return e;
  }

  Vector project(const Vector& x) const {
    check_shape(x);
    return restrict(x, support_of(x));
  }

  GroupSupport support_of(const Vector& x) const {
    check_shape(x);
    detail::require_finite(x, "BlockModel::support_of");
    GroupSupport s;
    s.ids = detail::top_k(group_energies(x), k_);
    return s;
  }

  GroupSupport active_support(const Vector& x) const {
    check_shape(x);
    GroupSupport s;
    for (Index g = 0; g < group_count(); ++g) {
      const auto& idx = groups_[static_cast<std::size_t>(g)];
      if (std::any_of(idx.begin(), idx.end(), [&](Index i) { return x(i) != 0.0; }))
        s.ids.push_back(g);
    }
    return s;
  }

  Index cardinality(const Vector& x) const { return active_support(x).size(); }

  Vector restrict(const Vector& x, const GroupSupport& s) const {
    check_shape(x);
    Vector out = Vector::Zero(n_);
    for (Index g : s.ids) {
      detail::require(g >= 0 && g < group_count(), "BlockModel::restrict: group id out of range");
      for (Index i : groups_[static_cast<std::size_t>(g)]) out(i) = x(i);
    }
    return out;
  }

  Vector restrict_complement(const Vector& x, const GroupSupport& s) const {
    return x - restrict(x, s);
  }

  GroupSupport unite(const GroupSupport& a, const GroupSupport& b) const {
    return detail::set_union(a, b);
  }

  GroupSupport full_support() const {
    std::vector<Index> all(groups_.size());
    std::iota(all.begin(), all.end(), Index{0});
    return GroupSupport(std::move(all));
  }

  std::vector<Index> coordinates(const GroupSupport& s) const {
    std::vector<Index> out;
    for (Index g : s.ids) {
      const auto& idx = groups_[static_cast<std::size_t>(g)];
      out.insert(out.end(), idx.begin(), idx.end());
    }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  std::vector<std::vector<Index>> groups_;
  Index k_;
  Index n_ = 0;
};

/// rank(X) ≤ r over ℝ^{rows×cols}.
class LowRankModel {
public:
  using signal_type = Matrix;
  using support_type = SubspaceSupport;

  /// Singular values below this fraction of the largest count as zero.
  static constexpr double kRankTol = 1e-12;

  LowRankModel(Index rows, Index cols, Index r) : rows_(rows), cols_(cols), r_(r) {
    detail::require(rows >= 1 && cols >= 1, "LowRankModel: dimensions must be positive");
    detail::require(r >= 1 && r <= std::min(rows, cols), "LowRankModel: need 1 <= r <= min(rows, cols)");
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index budget() const { return r_; }
  LowRankModel with_budget(Index r) const { return {rows_, cols_, r}; }

  void check_shape(const Matrix& x) const {
    detail::require(x.rows() == rows_ && x.cols() == cols_,
                    "LowRankModel: signal shape " + std::to_string(x.rows()) + "x" +
                        std::to_string(x.cols()) + " does not match " + std::to_string(rows_) +
                        "x" + std::to_string(cols_));
  }

  Matrix project(const Matrix& x) const {
    check_shape(x);
    return truncated_svd(x, r_).reconstruct();
  }

  SubspaceSupport support_of(const Matrix& x) const {
    check_shape(x);
    auto svd = truncated_svd(x, r_);
    return {std::move(svd.U), std::move(svd.V)};
  }

  /// Column/row space of x at its numerical rank.
  SubspaceSupport active_support(const Matrix& x) const {
    check_shape(x);
    detail::require_finite(x, "LowRankModel::active_support");
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Index rank = 0;
    if (s.size() > 0 && s(0) > 0.0)
      while (rank < s.size() && s(rank) > kRankTol * s(0)) ++rank;
    return {svd.matrixU().leftCols(rank), svd.matrixV().leftCols(rank)};
  }

  Index cardinality(const Matrix& x) const { return active_support(x).size(); }

  /// Orthogonal projection onto { L·C·Rᵀ }: L Lᵀ X R Rᵀ.
  Matrix restrict(const Matrix& x, const SubspaceSupport& s) const {
    check_shape(x);
    detail::require(s.left.rows() == rows_ && s.right.rows() == cols_,
                    "LowRankModel::restrict: support basis has wrong dimension");
    if (s.empty()) return Matrix::Zero(rows_, cols_);
    return s.left * (s.left.transpose() * x * s.right) * s.right.transpose();
  }

  Matrix restrict_complement(const Matrix& x, const SubspaceSupport& s) const {
    return x - restrict(x, s);
  }

  SubspaceSupport unite(const SubspaceSupport& a, const SubspaceSupport& b) const {
    Matrix l(rows_, a.left.cols() + b.left.cols());
    l << a.left, b.left;
    Matrix r(cols_, a.right.cols() + b.right.cols());
    r << a.right, b.right;
    return {orthonormal_basis(l), orthonormal_basis(r)};
  }

  SubspaceSupport empty_support() const { return {Matrix(rows_, 0), Matrix(cols_, 0)}; }

  SubspaceSupport full_support() const {
    return {Matrix::Identity(rows_, rows_), Matrix::Identity(cols_, cols_)};
  }

private:
  Index rows_;
  Index cols_;
  Index r_;
};

// Runtime-tagged wrappers for callers that pick the model at run time.

using StructureModel = std::variant<SparseModel, BlockModel, LowRankModel>;
using Signal = std::variant<Vector, Matrix>;
using Support = std::variant<CoordinateSupport, GroupSupport, SubspaceSupport>;

namespace detail {

template <class Model>
const typename Model::signal_type& signal_for(const Signal& x) {
  const auto* p = std::get_if<typename Model::signal_type>(&x);
  require(p != nullptr, "signal shape does not match the structure model");
  return *p;
}

template <class Model>
const typename Model::support_type& support_for(const Support& s) {
  const auto* p = std::get_if<typename Model::support_type>(&s);
  require(p != nullptr, "support variant does not match the structure model");
  return *p;
}

} // namespace detail

inline Signal project(const Signal& x, const StructureModel& model) {
  return std::visit(
      [&](const auto& m) -> Signal {
        using M = std::decay_t<decltype(m)>;
        return m.project(detail::signal_for<M>(x));
      },
      model);
}

inline Support support_of(const Signal& x, const StructureModel& model) {
  return std::visit(
      [&](const auto& m) -> Support {
        using M = std::decay_t<decltype(m)>;
        return m.support_of(detail::signal_for<M>(x));
      },
      model);
}

inline Signal restrict(const Signal& x, const Support& s, const StructureModel& model) {
  return std::visit(
      [&](const auto& m) -> Signal {
        using M = std::decay_t<decltype(m)>;
        return m.restrict(detail::signal_for<M>(x), detail::support_for<M>(s));
      },
      model);
}

inline Support unite(const Support& a, const Support& b, const StructureModel& model) {
  return std::visit(
      [&](const auto& m) -> Support {
        using M = std::decay_t<decltype(m)>;
        return m.unite(detail::support_for<M>(a), detail::support_for<M>(b));
      },
      model);
}

inline Index budget_of(const StructureModel& model) {
  return std::visit([](const auto& m) { return m.budget(); }, model);
}

} // namespace acciht
