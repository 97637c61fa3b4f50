#pragma once

// Accelerated iterative hard thresholding.
//
// Starting from x₀ = x₋₁ = u₀ = 0 and an empty support U₀, each iteration
//
//   Tᵢ     = supp(Π_k(∇_{Uᵢᶜ} f(uᵢ))) ∪ Uᵢ          support expansion
//   ūᵢ     = uᵢ − μᵢ ∇_{Tᵢ} f(uᵢ)                      restricted gradient step
//   xᵢ₊₁   = Π_k(ūᵢ)                                   projection (optional debias)
//   uᵢ₊₁   = xᵢ₊₁ + τ(xᵢ₊₁ − xᵢ),  Uᵢ₊₁ = supp(uᵢ₊₁)  momentum
//
// until ‖xᵢ − xᵢ₋₁‖ ≤ η‖xᵢ‖ or T iterations. τ = 0 is plain IHT.

#include <chrono>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "acciht/analysis.hpp"
#include "acciht/errors.hpp"
#include "acciht/models.hpp"
#include "acciht/numerics.hpp"
#include "acciht/objectives.hpp"

namespace acciht {

enum class StepRule {
  fixed,               // caller-supplied μ
  inverse_smoothness,  // μ = 1/β̂ with β̂ = λ_max(ΦᵀΦ) for least squares
  line_search,         // exact minimizer along the restricted gradient (quadratic losses)
};

struct StepSize {
  StepRule rule = StepRule::inverse_smoothness;
  double value = 0.0;

  static StepSize fixed(double mu) { return {StepRule::fixed, mu}; }
  static StepSize automatic() { return {StepRule::inverse_smoothness, 0.0}; }
  static StepSize line_search() { return {StepRule::line_search, 0.0}; }
};

struct SolverConfig {
  double tau = 0.25;
  StepSize step = StepSize::automatic();
  double eta = 1e-7;
  std::size_t max_iter = 10000;
  bool debias = false;
  /// When set, τ is checked against the guaranteed range for ξ(κ) and a
  /// warning is recorded if it falls outside. The run proceeds either way.
  std::optional<double> kappa;
  /// Keep every iterate in the trace (otherwise only the last one).
  bool keep_iterates = true;

  void validate() const {
    detail::require(std::isfinite(tau), "SolverConfig: tau must be finite");
    detail::require(eta > 0.0 && std::isfinite(eta), "SolverConfig: eta must be > 0");
    detail::require(max_iter >= 1, "SolverConfig: max_iter must be >= 1");
    if (step.rule == StepRule::fixed)
      detail::require(step.value > 0.0 && std::isfinite(step.value), "SolverConfig: step size must be > 0");
    if (kappa) detail::require(*kappa > 1.0, "SolverConfig: kappa must be > 1");
  }
};

enum class Termination { converged, max_iterations, diverged };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max-iterations";
    case Termination::diverged: return "diverged";
  }
  return "unknown";
}

/// Objective values beyond this multiple of (1 + f(x₀)) count as divergence.
inline constexpr double kDivergenceFactor = 1e12;

template <class Model>
struct IterationRecord {
  using signal_type = typename Model::signal_type;
  using support_type = typename Model::support_type;

  std::size_t iter = 0;
  signal_type x;  // empty when iterates are not kept
  support_type support;
  double f_value = 0.0;
  double step_norm = 0.0;  // ‖xᵢ − xᵢ₋₁‖
  std::optional<double> dist_to_truth;
  double mu = 0.0;  // step used to produce this iterate (0 for x₀)
};

template <class Model>
struct SolverTrace {
  using signal_type = typename Model::signal_type;

  std::vector<IterationRecord<Model>> records;
  Termination termination = Termination::max_iterations;
  double wall_seconds = 0.0;
  std::vector<std::string> warnings;
  signal_type solution;

  /// Number of completed iterations (records minus the initial point).
  std::size_t iterations() const { return records.empty() ? 0 : records.size() - 1; }
  bool diverged() const { return termination == Termination::diverged; }
};

// ---------------------------------------------------------------------------
// Debias: least-squares refit on the current support.

template <class Signal>
struct DebiasResult {
  Signal x;
  bool rank_deficient = false;
};

template <class Model>
  requires std::same_as<typename Model::signal_type, Vector>
DebiasResult<Vector> debias(const Vector& x, const LeastSquares& ls, const Model& model) {
  const auto coords = model.coordinates(model.active_support(x));
  try {
    return {solve_restricted_ls(ls.design(), ls.observations(), coords), false};
  } catch (const NumericalError&) {
    return {x, true};
  }
}

inline DebiasResult<Matrix> debias(const Matrix& x, const MaskedLeastSquares& obj, const LowRankModel& model) {
  const auto s = model.active_support(x);
  if (s.empty()) return {x, false};
  const Index a = s.left.cols();
  const Index b = s.right.cols();
  // Unknown core C (a x b), X = L C Rᵀ; observation (i,j) reads Σ L_ip C_pq R_jq.
  Matrix design(obj.observed_count(), a * b);
  const auto& pos = obj.positions();
  for (std::size_t t = 0; t < pos.size(); ++t)
    for (Index q = 0; q < b; ++q)
      for (Index p = 0; p < a; ++p)
        design(static_cast<Index>(t), q * a + p) = s.left(pos[t].row, p) * s.right(pos[t].col, q);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(kDirectTol);
  if (qr.rank() < design.cols()) return {x, true};
  const Vector c = qr.solve(obj.observations());
  const Matrix core = Eigen::Map<const Matrix>(c.data(), a, b);
  return {s.left * core * s.right.transpose(), false};
}

template <class O, class Model>
concept Debiasable = requires(const typename Model::signal_type& x, const O& o, const Model& m) {
  { debias(x, o, m) };
};

// ---------------------------------------------------------------------------

/// Tᵢ from a precomputed gradient.
template <class Model>
typename Model::support_type expand_support(const typename Model::signal_type& gradient, const Model& model,
                                            const typename Model::support_type& current) {
  const auto outside = model.restrict_complement(gradient, current);
  return model.unite(model.support_of(outside), current);
}

template <Objective O, class Model>
typename Model::support_type support_expansion(const typename Model::signal_type& u, const O& obj,
                                               const Model& model, const typename Model::support_type& current) {
  return expand_support(obj.gradient(u), model, current);
}

/// Unconstrained minimizer over τ of ‖b − Φ(x_new + τ(x_new − x_old))‖².
inline double line_search_tau(const LeastSquares& ls, const Vector& x_new, const Vector& x_old) {
  ls.check_shape(x_new);
  ls.check_shape(x_old);
  const Vector pd = ls.design() * (x_new - x_old);
  const double denom = pd.squaredNorm();
  detail::require(denom > 0.0, "line_search_tau: direction is zero in the range of Phi");
  return ls.residual(x_new).dot(pd) / denom;
}

namespace detail {

template <class Model>
typename Model::support_type empty_support_of(const Model& model) {
  if constexpr (std::same_as<Model, LowRankModel>) {
    return model.empty_support();
  } else {
    return {};
  }
}

} // namespace detail

/// Runs the accelerated iteration. `truth`, when given, fills dist_to_truth.
template <Objective O, class Model>
  requires std::same_as<typename O::signal_type, typename Model::signal_type>
SolverTrace<Model> acc_iht(const O& obj, const Model& model, const SolverConfig& cfg,
                           const std::optional<typename Model::signal_type>& truth = std::nullopt) {
  using S = typename Model::signal_type;
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();

  SolverTrace<Model> trace;
  if (cfg.kappa) {
    const double xi = xi_of(*cfg.kappa);
    const auto range = tau_range(xi);
    if (!range || !range->contains(cfg.tau))
      trace.warnings.push_back("tau = " + std::to_string(cfg.tau) + " is outside the guaranteed range for xi = " +
                               std::to_string(xi));
  }
  if (cfg.debias && !Debiasable<O, Model>)
    throw ValidationError("acc_iht: debias is only available for least-squares objectives");

  double inv_smooth = 0.0;
  if (cfg.step.rule == StepRule::inverse_smoothness || cfg.step.rule == StepRule::line_search) {
    if constexpr (HasSmoothnessBound<O>) {
      const double beta_hat = obj.smoothness_bound();
      if (beta_hat > 0.0) inv_smooth = 1.0 / beta_hat;
    }
    if (cfg.step.rule == StepRule::inverse_smoothness && !(inv_smooth > 0.0))
      throw ValidationError("acc_iht: automatic step needs a positive smoothness bound");
  }
  if (cfg.step.rule == StepRule::line_search && !QuadraticObjective<O>)
    throw ValidationError("acc_iht: line-search step needs a quadratic objective");

  S x;
  if constexpr (std::same_as<Model, LowRankModel>) {
    x = Matrix::Zero(model.rows(), model.cols());
  } else {
    x = Vector::Zero(model.dimension());
  }
  S u = x;
  auto u_support = detail::empty_support_of(model);
  const Index k = model.budget();

  const double f0 = obj.value(x);
  auto record = [&](std::size_t iter, const S& xi, double f, double step_norm, double mu) {
    IterationRecord<Model> rec;
    rec.iter = iter;
    if (cfg.keep_iterates) rec.x = xi;
    if (all_finite(xi)) rec.support = model.active_support(xi);
    rec.f_value = f;
    rec.step_norm = step_norm;
    rec.mu = mu;
    if (truth) rec.dist_to_truth = (xi - *truth).norm();
    trace.records.push_back(std::move(rec));
  };
  record(0, x, f0, 0.0, 0.0);

  trace.termination = Termination::max_iterations;
  for (std::size_t i = 0; i < cfg.max_iter; ++i) {
    const S grad = obj.gradient(u);
    if (!all_finite(grad)) {
      trace.termination = Termination::diverged;
      break;
    }
    const auto t_support = expand_support(grad, model, u_support);
    if (t_support.size() > 3 * k) throw std::logic_error("acc_iht: expanded support exceeds 3k atoms");
    const S g_t = model.restrict(grad, t_support);

    double mu = cfg.step.value;
    if (cfg.step.rule == StepRule::inverse_smoothness) {
      mu = inv_smooth;
    } else if (cfg.step.rule == StepRule::line_search) {
      if constexpr (QuadraticObjective<O>) {
        const double gg = g_t.squaredNorm();
        const double curv = obj.curvature(g_t);
        mu = gg == 0.0 ? 0.0 : (curv > 0.0 ? gg / curv : inv_smooth);
      }
    }

    const S u_bar = u - mu * g_t;
    if (!all_finite(u_bar)) {
      trace.termination = Termination::diverged;
      break;
    }
    S x_next = model.project(u_bar);
    if (cfg.debias) {
      if constexpr (Debiasable<O, Model>) {
        auto d = debias(x_next, obj, model);
        if (d.rank_deficient)
          trace.warnings.push_back("iteration " + std::to_string(i + 1) +
                                   ": debias skipped, support columns are rank deficient");
        x_next = std::move(d.x);
      }
    }
    if (model.cardinality(x_next) > k) throw std::logic_error("acc_iht: iterate exceeds the budget");

    const double f = obj.value(x_next);
    const double step_norm = (x_next - x).norm();
    record(i + 1, x_next, f, step_norm, mu);

    if (!std::isfinite(f) || f > kDivergenceFactor * (1.0 + f0)) {
      trace.termination = Termination::diverged;
      x = std::move(x_next);
      break;
    }
    const bool stop = step_norm <= cfg.eta * x_next.norm();

    S u_next = x_next + cfg.tau * (x_next - x);
    x = std::move(x_next);
    if (stop) {
      trace.termination = Termination::converged;
      break;
    }
    u = std::move(u_next);
    u_support = model.active_support(u);
    if (u_support.size() > 2 * k) throw std::logic_error("acc_iht: momentum support exceeds 2k atoms");
  }

  trace.solution = x;
  if (!cfg.keep_iterates && !trace.records.empty()) trace.records.back().x = x;
  trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return trace;
}

/// Plain IHT: the accelerated iteration with τ forced to 0.
template <Objective O, class Model>
SolverTrace<Model> iht(const O& obj, const Model& model, SolverConfig cfg,
                       const std::optional<typename Model::signal_type>& truth = std::nullopt) {
  cfg.tau = 0.0;
  return acc_iht(obj, model, cfg, truth);
}

} // namespace acciht
