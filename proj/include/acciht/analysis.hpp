#pragma once

// Convergence theory of momentum hard thresholding for least squares.
//
// With x₀ = x₋₁ = 0 and step μ = 2/(α₃ₖ + β₃ₖ), consecutive errors obey
//
//   [‖x_{i+1} − x★‖]     [ξ|1+τ|  ξ|τ|] [‖x_i − x★‖    ]   [1]
//   [‖x_i − x★‖    ]  ≤  [  1      0  ] [‖x_{i−1} − x★‖] + [0] c·‖ε‖
//
// with ξ = 2(κ−1)/(κ+1), κ = β₃ₖ/α₃ₖ and c = 2√β₂ₖ/(α₃ₖ+β₃ₖ). Everything
// below turns that 2x2 system into numbers: its spectrum, closed-form
// powers, the admissible momentum interval, the geometric sum, the
// resulting error curve and the iteration count to reach a target error.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "acciht/errors.hpp"
#include "acciht/numerics.hpp"

namespace acciht {

using Matrix2 = Eigen::Matrix2d;

inline constexpr double kGoldenRatio = std::numbers::phi;

/// ξ = 2(κ−1)/(κ+1), defined for κ > 1.
inline double xi_of(double kappa) {
  detail::require(std::isfinite(kappa) && kappa > 1.0, "xi_of: kappa must be finite and > 1");
  return 2.0 * (kappa - 1.0) / (kappa + 1.0);
}

/// 1 − α/β, the alternative figure some presentations quote for ξ. Reported
/// alongside xi_of for reference only.
inline double xi_one_minus_ratio(double alpha, double beta) {
  detail::require(alpha > 0.0 && beta >= alpha, "xi_one_minus_ratio: need 0 < alpha <= beta");
  return 1.0 - alpha / beta;
}

struct ContractionSystem {
  double xi;
  double tau;
  Matrix2 A;
  double lambda1;  // largest magnitude
  double lambda2;
  double delta;    // trace² − 4·det
};

inline ContractionSystem contraction_matrix(double xi, double tau) {
  detail::require(std::isfinite(xi) && std::isfinite(tau), "contraction_matrix: non-finite input");
  detail::require(xi > 0.0, "contraction_matrix: xi must be > 0");
  ContractionSystem sys{xi, tau, Matrix2::Zero(), 0.0, 0.0, 0.0};
  const double a = xi * std::abs(1.0 + tau);
  const double b = xi * std::abs(tau);
  sys.A << a, b, 1.0, 0.0;
  sys.delta = xi * xi * (1.0 + tau) * (1.0 + tau) + 4.0 * xi * std::abs(tau);
  const double root = std::sqrt(sys.delta);
  sys.lambda1 = 0.5 * (a + root);
  // λ₁λ₂ = det(A) = −ξ|τ|; dividing avoids cancellation in (a − root)/2.
  sys.lambda2 = sys.lambda1 != 0.0 ? -b / sys.lambda1 : 0.5 * (a - root);
  return sys;
}

/// Aⁱ for a 2x2 matrix with real spectrum, via the eigenvalue closed forms:
///   distinct:  Aⁱ = (λ₁ⁱ−λ₂ⁱ)/(λ₁−λ₂)·A − λ₁λ₂(λ₁ⁱ⁻¹−λ₂ⁱ⁻¹)/(λ₁−λ₂)·I
///   repeated:  Aⁱ = λⁱ·I + i·λⁱ⁻¹·(A − λI)
/// The repeated branch is taken when |λ₁−λ₂| ≤ 1e-9·(|λ₁|+|λ₂|+1).
inline Matrix2 matrix_power(const Matrix2& A, unsigned i) {
  detail::require(A.allFinite(), "matrix_power: non-finite entries");
  if (i == 0) return Matrix2::Identity();
  const double tr = A.trace();
  const double det = A.determinant();
  double disc = tr * tr - 4.0 * det;
  const double scale = tr * tr + 4.0 * std::abs(det);
  if (disc < 0.0) {
    if (disc < -1e-12 * scale) throw NumericalError("matrix_power: complex eigenvalues");
    disc = 0.0;
  }
  const double root = std::sqrt(disc);
  const double l1 = 0.5 * (tr + (tr >= 0.0 ? root : -root));
  const double l2 = l1 != 0.0 ? det / l1 : 0.5 * (tr - (tr >= 0.0 ? root : -root));

  const double n = static_cast<double>(i);
  if (std::abs(l1 - l2) > 1e-9 * (std::abs(l1) + std::abs(l2) + 1.0)) {
    const double c1 = (std::pow(l1, n) - std::pow(l2, n)) / (l1 - l2);
    const double c0 = l1 * l2 * (std::pow(l1, n - 1.0) - std::pow(l2, n - 1.0)) / (l1 - l2);
    return c1 * A - c0 * Matrix2::Identity();
  }
  const double lambda = 0.5 * tr;
  return std::pow(lambda, n) * Matrix2::Identity() +
         n * std::pow(lambda, n - 1.0) * (A - lambda * Matrix2::Identity());
}

struct TauInterval {
  double lo;
  double hi;
  bool contains(double tau) const { return tau >= lo && tau <= hi; }
};

/// Momentum values with guaranteed contraction: |τ| ≤ (1 − φ√ξ)/(φ√ξ).
/// Empty when φ√ξ > 1; the single point {0} on the boundary.
inline std::optional<TauInterval> tau_range(double xi) {
  detail::require(std::isfinite(xi) && xi > 0.0, "tau_range: xi must be > 0");
  const double g = kGoldenRatio * std::sqrt(xi);
  if (std::abs(g - 1.0) <= 1e-12) return TauInterval{0.0, 0.0};
  if (g > 1.0) return std::nullopt;
  const double t = (1.0 - g) / g;
  return TauInterval{-t, t};
}

/// B = (I − A)⁻¹ = Σᵢ Aⁱ, valid for τ ≥ 0 and ξ(1+2τ) < 1.
inline Matrix2 geometric_sum(double xi, double tau) {
  detail::require(xi > 0.0, "geometric_sum: xi must be > 0");
  detail::require(tau >= 0.0, "geometric_sum: closed form requires tau >= 0");
  const double d = 1.0 - xi * (1.0 + 2.0 * tau);
  detail::require(d > 0.0, "geometric_sum: xi*(1+2*tau) must be < 1");
  Matrix2 B;
  B << 1.0, xi * tau, 1.0, 1.0 - xi * (1.0 + tau);
  return B / d;
}

struct OptimalStep {
  double mu;           // 2/(α+β)
  double contraction;  // (β−α)/(β+α) = min over μ of max(μβ−1, 1−μα)
};

inline OptimalStep optimal_mu(double alpha, double beta) {
  detail::require(alpha > 0.0, "optimal_mu: alpha must be > 0");
  detail::require(beta >= alpha, "optimal_mu: beta must be >= alpha");
  return {2.0 / (alpha + beta), (beta - alpha) / (beta + alpha)};
}

// ---------------------------------------------------------------------------
// Restricted isometry constants

enum class RipMethod { exact_enumeration, lambda_max_surrogate, user_supplied };

inline const char* to_string(RipMethod m) {
  switch (m) {
    case RipMethod::exact_enumeration: return "exact-enumeration";
    case RipMethod::lambda_max_surrogate: return "lambda-max-surrogate";
    case RipMethod::user_supplied: return "user-supplied";
  }
  return "unknown";
}

struct RipPair {
  double alpha;
  double beta;
};

/// Per-sparsity-level constants α_s ≤ β_s.
struct RipConstants {
  std::map<Index, RipPair> levels;
  RipMethod method = RipMethod::user_supplied;

  const RipPair& at(Index s) const {
    auto it = levels.find(s);
    detail::require(it != levels.end(), "RipConstants: no constants for level " + std::to_string(s));
    return it->second;
  }
};

/// C(n, s) saturating at UINT64_MAX.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t s) {
  if (s > n) return 0;
  s = std::min(s, n - s);
  unsigned __int128 c = 1;
  for (std::uint64_t i = 1; i <= s; ++i) {
    c = c * (n - s + i) / i;
    if (c > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(c);
}

inline constexpr std::uint64_t kRipEnumerationBudget = 1'000'000;

/// α_s = min, β_s = max of the extreme eigenvalues of Φ_Sᵀ Φ_S over every
/// s-column subset S.
inline RipPair rip_exact(const Matrix& phi, Index s, std::uint64_t budget = kRipEnumerationBudget) {
  const Index n = phi.cols();
  detail::require(s >= 1 && s <= n, "rip_exact: level must satisfy 1 <= s <= n");
  const auto count = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(s));
  detail::require(count <= budget, "rip_exact: C(" + std::to_string(n) + ", " + std::to_string(s) +
                                       ") subsets exceed the enumeration budget; use the surrogate");
  const Matrix gram = phi.transpose() * phi;
  RipPair out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  std::vector<Index> idx(static_cast<std::size_t>(s));
  for (Index j = 0; j < s; ++j) idx[static_cast<std::size_t>(j)] = j;
  Matrix sub(s, s);
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  while (true) {
    for (Index a = 0; a < s; ++a)
      for (Index b = 0; b < s; ++b) sub(a, b) = gram(idx[a], idx[b]);
    es.compute(sub, Eigen::EigenvaluesOnly);
    out.alpha = std::min(out.alpha, es.eigenvalues()(0));
    out.beta = std::max(out.beta, es.eigenvalues()(s - 1));
    // next combination in lexicographic order
    Index pos = s - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - s + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (Index j = pos + 1; j < s; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// β̂ = λ_max(ΦᵀΦ); dominates β_s for every s.
inline double rip_surrogate(const Matrix& phi) { return gram_lambda_max(phi); }

/// Exact constants at the levels the theory needs: k, 2k and 3k (levels
/// above n are skipped).
inline RipConstants rip_constants_exact(const Matrix& phi, Index k,
                                        std::uint64_t budget = kRipEnumerationBudget) {
  RipConstants rc;
  rc.method = RipMethod::exact_enumeration;
  for (Index s : {k, 2 * k, 3 * k})
    if (s <= phi.cols()) rc.levels[s] = rip_exact(phi, s, budget);
  return rc;
}

/// Bounds valid at every level by eigenvalue interlacing: α_s ≥ λ_min(ΦᵀΦ)
/// and β_s ≤ λ_max(ΦᵀΦ). Cheap, but α is zero whenever Φ has more columns
/// than rows.
inline RipConstants rip_constants_surrogate(const Matrix& phi, Index k) {
  detail::require(phi.cols() >= 1, "rip_constants_surrogate: empty design");
  const Matrix gram = phi.transpose() * phi;
  const auto ev = extreme_eigs_sym(gram);
  RipConstants rc;
  rc.method = RipMethod::lambda_max_surrogate;
  for (Index s : {k, 2 * k, 3 * k}) rc.levels[s] = {std::max(ev.lambda_min, 0.0), ev.lambda_max};
  return rc;
}

/// The constants entering the per-iteration recursion.
struct LemmaConstants {
  double alpha_3k;
  double beta_3k;
  double beta_2k;

  double kappa() const { return beta_3k / alpha_3k; }
  double xi() const { return xi_of(kappa()); }
  double mu() const { return optimal_mu(alpha_3k, beta_3k).mu; }
  /// 2√β₂ₖ/(α₃ₖ+β₃ₖ)
  double noise_coefficient() const { return 2.0 * std::sqrt(beta_2k) / (alpha_3k + beta_3k); }
};

inline LemmaConstants lemma_constants(const RipConstants& rip, Index k) {
  const auto& l3 = rip.at(3 * k);
  const auto& l2 = rip.at(2 * k);
  detail::require(l3.alpha > 0.0, "lemma_constants: alpha_3k must be > 0");
  return {l3.alpha, l3.beta, l2.beta};
}

// ---------------------------------------------------------------------------
// Error bounds

struct BoundReport {
  std::optional<TauInterval> tau_range;
  std::optional<std::size_t> iteration_bound;  // nullopt: infeasible or not requested
  std::vector<double> error_curve;              // upper bound on ‖x_t − x★‖ for t = 0..T
  double noise_floor = 0.0;
};

namespace detail {

inline void require_bound_domain(const ContractionSystem& sys) {
  require(sys.tau >= 0.0, "error bound: requires tau >= 0");
  require(1.0 - sys.xi * (1.0 + 2.0 * sys.tau) > 0.0, "error bound: requires xi*(1+2*tau) < 1");
  require(std::abs(sys.lambda1) < 1.0, "error bound: requires |lambda1| < 1");
  require(std::abs(sys.lambda1) != std::abs(sys.lambda2), "error bound: requires |lambda1| != |lambda2|");
}

inline double bound_at(const ContractionSystem& sys, double x_star_norm, double noise, std::size_t t) {
  const double c = 1.0 + sys.xi * (1.0 + 2.0 * sys.tau);
  const double d = 1.0 - sys.xi * (1.0 + 2.0 * sys.tau);
  const double l1 = std::abs(sys.lambda1);
  const double gap = l1 - std::abs(sys.lambda2);
  const double decay = 2.0 * std::pow(l1, static_cast<double>(t)) / gap;
  return decay * (c * x_star_norm + c / d * noise) + noise / d;
}

} // namespace detail

/// Upper bounds on ‖x_t − x★‖ for t = 0..T. `noise_coefficient` is
/// 2√β₂ₖ/(α₃ₖ+β₃ₖ); it only matters when eps_norm > 0.
inline BoundReport error_bound(double xi, double tau, double noise_coefficient, double x_star_norm,
                               double eps_norm, std::size_t T) {
  detail::require(x_star_norm >= 0.0 && eps_norm >= 0.0, "error_bound: norms must be >= 0");
  detail::require(noise_coefficient >= 0.0 && std::isfinite(noise_coefficient),
                  "error_bound: noise coefficient must be finite and >= 0");
  const auto sys = contraction_matrix(xi, tau);
  detail::require_bound_domain(sys);
  const double noise = noise_coefficient * eps_norm;
  BoundReport rep;
  rep.tau_range = tau_range(xi);
  rep.noise_floor = noise / (1.0 - xi * (1.0 + 2.0 * tau));
  rep.error_curve.reserve(T + 1);
  for (std::size_t t = 0; t <= T; ++t) rep.error_curve.push_back(detail::bound_at(sys, x_star_norm, noise, t));
  return rep;
}

inline BoundReport error_bound(double xi, double tau, const LemmaConstants& lc, double x_star_norm,
                               double eps_norm, std::size_t T) {
  return error_bound(xi, tau, lc.noise_coefficient(), x_star_norm, eps_norm, T);
}

/// Bound curve from unrolling the recursion directly: with e₀ = e₋₁ = ‖x★‖,
///   bound_t = [Aᵗ (‖x★‖, ‖x★‖)ᵀ]₀ + c‖ε‖ · Σ_{j<t} [Aʲ]₀₀.
/// Valid for any τ (no closed-form domain restrictions), used when the
/// closed form does not apply.
inline std::vector<double> error_curve_recursion(double xi, double tau, double noise_coefficient,
                                                 double x_star_norm, double eps_norm, std::size_t T) {
  detail::require(x_star_norm >= 0.0 && eps_norm >= 0.0, "error_curve_recursion: norms must be >= 0");
  const auto sys = contraction_matrix(xi, tau);
  const double noise = noise_coefficient * eps_norm;
  std::vector<double> curve;
  curve.reserve(T + 1);
  Eigen::Vector2d e(x_star_norm, x_star_norm);
  double acc = 0.0;
  Matrix2 power = Matrix2::Identity();
  for (std::size_t t = 0; t <= T; ++t) {
    curve.push_back(e(0) + noise * acc);
    acc += power(0, 0);
    power = sys.A * power;
    e = sys.A * e;
  }
  return curve;
}

/// Smallest T with noiseless error bound ≤ ζ, or nullopt when |λ₁| ≥ 1.
/// log(ratio)/log(1/|λ₁|) is rounded up, then nudged by at most a step so
/// that the count agrees exactly with the error_bound curve.
inline std::optional<std::size_t> iteration_bound(double xi, double tau, double x_star_norm, double zeta) {
  detail::require(zeta > 0.0 && std::isfinite(zeta), "iteration_bound: zeta must be > 0");
  detail::require(x_star_norm >= 0.0, "iteration_bound: norm must be >= 0");
  const auto sys = contraction_matrix(xi, tau);
  if (std::abs(sys.lambda1) >= 1.0) return std::nullopt;
  detail::require_bound_domain(sys);
  auto bound = [&](std::size_t t) { return detail::bound_at(sys, x_star_norm, 0.0, t); };
  if (bound(0) <= zeta) return 0;
  const double gap = std::abs(sys.lambda1) - std::abs(sys.lambda2);
  const double ratio = 2.0 * (1.0 + xi * (1.0 + 2.0 * tau)) * x_star_norm / (zeta * gap);
  auto T = static_cast<std::size_t>(std::max(0.0, std::ceil(std::log(ratio) / -std::log(std::abs(sys.lambda1)))));
  while (bound(T) > zeta) ++T;
  while (T > 0 && bound(T - 1) <= zeta) --T;
  return T;
}

} // namespace acciht
