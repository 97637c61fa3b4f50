#pragma once

// Experiment drivers behind the command-line tool: momentum sweeps with
// regime classification, the momentum counterexample, and bound analysis
// from ξ, κ or a design matrix.

#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "acciht/analysis.hpp"
#include "acciht/errors.hpp"
#include "acciht/models.hpp"
#include "acciht/objectives.hpp"
#include "acciht/problems.hpp"
#include "acciht/report.hpp"
#include "acciht/solvers.hpp"

namespace acciht {

// ---------------------------------------------------------------------------
// Regime classification

enum class Regime { converged_monotone, converged_rippling, diverged, not_converged };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::converged_monotone: return "converged-monotone";
    case Regime::converged_rippling: return "converged-rippling";
    case Regime::diverged: return "diverged";
    case Regime::not_converged: return "not-converged";
  }
  return "unknown";
}

/// True when f(x_{i+1}) > f(x_i)·(1 + 1e-12) for some i. An extra absolute
/// slack of 1e-14·√(f_i·f₀) absorbs rounding in ½‖r‖² once the residual is
/// tiny compared with b.
template <class Model>
bool has_objective_increase(const SolverTrace<Model>& trace) {
  if (trace.records.empty()) return false;
  const double f0 = trace.records.front().f_value;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    const double prev = trace.records[i - 1].f_value;
    const double cur = trace.records[i].f_value;
    if (cur > prev * (1.0 + 1e-12) + 1e-14 * std::sqrt(std::max(prev, 0.0) * std::max(f0, 0.0))) return true;
  }
  return false;
}

template <class Model>
Regime classify(const SolverTrace<Model>& trace) {
  if (trace.termination == Termination::diverged) return Regime::diverged;
  if (trace.termination == Termination::max_iterations) return Regime::not_converged;
  return has_objective_increase(trace) ? Regime::converged_rippling : Regime::converged_monotone;
}

// ---------------------------------------------------------------------------
// Momentum sweep

struct TauSweepRow {
  double tau = 0.0;
  Regime regime = Regime::not_converged;
  std::size_t iterations = 0;
  double final_f = 0.0;
  std::optional<double> final_error;  // ‖x_T − x★‖ when the truth is known
  bool in_guaranteed_range = false;
};

struct TauSweepReport {
  std::vector<TauSweepRow> rows;
  std::optional<LemmaConstants> lemma;
  std::optional<TauInterval> tau_range;
  std::vector<std::string> notes;
};

/// Runs acc_iht once per grid value. Grid points are independent and run
/// concurrently; rows come back in grid order.
inline TauSweepReport tau_sweep(const SparseRegressionInstance& inst, const std::vector<double>& grid,
                                const SolverConfig& base, bool with_theory = true) {
  detail::require(!grid.empty(), "tau_sweep: empty tau grid");
  base.validate();
  TauSweepReport rep;
  if (with_theory) {
    const Index k = inst.model.budget();
    const Matrix& phi = inst.objective.design();
    if (3 * k > phi.cols()) {
      rep.notes.push_back("3k exceeds n; no restricted constants at level 3k");
    } else if (binomial(static_cast<std::uint64_t>(phi.cols()), static_cast<std::uint64_t>(3 * k)) >
               kRipEnumerationBudget) {
      rep.notes.push_back("restricted constants not enumerated: too many subsets");
    } else {
      const auto lc = lemma_constants(rip_constants_exact(phi, k), k);
      if (lc.alpha_3k > 0.0 && lc.beta_3k > lc.alpha_3k) {
        rep.lemma = lc;
        rep.tau_range = tau_range(lc.xi());
        if (!rep.tau_range) rep.notes.push_back("guaranteed tau range is empty for xi = " + std::to_string(lc.xi()));
      } else {
        rep.notes.push_back("alpha_3k is zero; restricted condition number is unbounded");
      }
    }
  }

  std::vector<std::future<TauSweepRow>> jobs;
  jobs.reserve(grid.size());
  for (double tau : grid) {
    jobs.push_back(std::async(std::launch::async, [&inst, &base, &rep, tau] {
      SolverConfig cfg = base;
      cfg.tau = tau;
      cfg.keep_iterates = false;
      const auto trace = acc_iht(inst.objective, inst.model, cfg, inst.truth);
      TauSweepRow row;
      row.tau = tau;
      row.regime = classify(trace);
      row.iterations = trace.iterations();
      row.final_f = trace.records.back().f_value;
      row.final_error = trace.records.back().dist_to_truth;
      row.in_guaranteed_range = rep.tau_range && rep.tau_range->contains(tau);
      return row;
    }));
  }
  for (auto& j : jobs) rep.rows.push_back(j.get());
  return rep;
}

/// Evenly spaced grid lo, lo+step, ..., hi (inclusive within rounding).
inline std::vector<double> linear_grid(double lo, double hi, double step) {
  detail::require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, "tau grid: need lo <= hi");
  detail::require(step > 0.0 && std::isfinite(step), "tau grid: step must be > 0");
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  detail::require(count <= 100000, "tau grid: too many points");
  std::vector<double> g;
  g.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double v = lo + static_cast<double>(i) * step;
    if (std::abs(v) < 1e-12 * step) v = 0.0;  // keep an exact IHT row when 0 is on the grid
    g.push_back(v);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Counterexample: a least-squares instance where any positive momentum
// between two consecutive iterates increases the objective.

struct CounterexampleReport {
  double residual_x1 = 0.0;  // ‖b − Φx₁‖
  double residual_x2 = 0.0;  // ‖b − Φx₂‖
  double tau_star = 0.0;     // exact line search along d = x₂ − x₁
  std::vector<double> tau_grid;
  std::vector<double> f_curve;  // f(x₂ + τd) on tau_grid
  bool strictly_increasing = false;
};

inline LeastSquares counterexample_objective() {
  Matrix phi(2, 3);
  phi << 0.3816, -0.2726, 0.0077, -0.1598, 1.9364, -0.3908;
  Vector b(2);
  b << 0.3870, -0.1514;
  return {phi, b};
}

inline CounterexampleReport counterexample(std::size_t grid_points = 101) {
  detail::require(grid_points >= 2, "counterexample: need at least two grid points");
  const LeastSquares ls = counterexample_objective();
  Vector x1(3), x2(3);
  x1 << -1.7338, 0.0, 0.0;
  x2 << 1.5415, 0.0, 0.0;
  const Vector d = x2 - x1;

  CounterexampleReport rep;
  rep.residual_x1 = ls.residual(x1).norm();
  rep.residual_x2 = ls.residual(x2).norm();
  rep.tau_star = line_search_tau(ls, x2, x1);
  rep.strictly_increasing = true;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(grid_points - 1);
    rep.tau_grid.push_back(tau);
    rep.f_curve.push_back(ls.value(x2 + tau * d));
    if (i > 0 && !(rep.f_curve[i] > rep.f_curve[i - 1])) rep.strictly_increasing = false;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Bound analysis

struct AnalyzeInput {
  std::optional<double> xi;
  std::optional<double> kappa;
  std::optional<Matrix> phi;
  Index k = 0;  // required with phi
  double tau = 0.25;
  std::size_t horizon = 50;  // error curve covers t = 0..horizon
  double x_star_norm = 1.0;
  double eps_norm = 0.0;
  double zeta = 1e-6;  // target error for the iteration count
  bool allow_surrogate = false;
};

inline report::AnalysisReport analyze(const AnalyzeInput& in) {
  const int sources = int(in.xi.has_value()) + int(in.kappa.has_value()) + int(in.phi.has_value());
  detail::require(sources == 1, "analyze: give exactly one of xi, kappa or a design matrix");
  detail::require(std::isfinite(in.tau), "analyze: tau must be finite");
  detail::require(in.x_star_norm >= 0.0 && in.eps_norm >= 0.0, "analyze: norms must be >= 0");

  report::AnalysisReport out;
  double xi = 0.0;
  double noise_coefficient = 0.0;
  if (in.xi) {
    detail::require(std::isfinite(*in.xi) && *in.xi > 0.0, "analyze: xi must be > 0");
    xi = *in.xi;
  } else if (in.kappa) {
    xi = xi_of(*in.kappa);
  } else {
    const Matrix& phi = *in.phi;
    detail::require(in.k >= 1, "analyze: k must be >= 1 with a design matrix");
    detail::require(3 * in.k <= phi.cols(), "analyze: 3k must not exceed the number of columns");
    const auto count = binomial(static_cast<std::uint64_t>(phi.cols()), static_cast<std::uint64_t>(3 * in.k));
    if (count <= kRipEnumerationBudget) {
      out.rip = rip_constants_exact(phi, in.k);
    } else {
      detail::require(in.allow_surrogate,
                      "analyze: exact enumeration of C(n, 3k) subsets exceeds the budget; pass the surrogate option");
      out.rip = rip_constants_surrogate(phi, in.k);
      out.notes.push_back("restricted constants bounded by the extreme eigenvalues of the full Gram matrix");
    }
    out.lemma = lemma_constants(*out.rip, in.k);
    detail::require(out.lemma->kappa() > 1.0, "analyze: restricted condition number must exceed 1");
    xi = out.lemma->xi();
    noise_coefficient = out.lemma->noise_coefficient();
  }
  if (in.eps_norm > 0.0 && !out.lemma)
    out.notes.push_back("noise norm ignored: the noise coefficient needs restricted constants from a design");

  out.system = contraction_matrix(xi, in.tau);
  out.bounds.tau_range = tau_range(xi);
  if (!out.bounds.tau_range) out.notes.push_back("guaranteed tau range is empty (phi * sqrt(xi) > 1)");
  else if (!out.bounds.tau_range->contains(in.tau)) out.notes.push_back("tau lies outside the guaranteed range");

  const bool closed_form = in.tau >= 0.0 && xi * (1.0 + 2.0 * in.tau) < 1.0 &&
                           std::abs(out.system.lambda1) < 1.0 &&
                           std::abs(out.system.lambda1) != std::abs(out.system.lambda2);
  if (closed_form) {
    auto b = error_bound(xi, in.tau, noise_coefficient, in.x_star_norm, in.eps_norm, in.horizon);
    out.bounds.error_curve = std::move(b.error_curve);
    out.bounds.noise_floor = b.noise_floor;
    out.bounds.iteration_bound = iteration_bound(xi, in.tau, in.x_star_norm, in.zeta);
  } else {
    out.bounds.error_curve = error_curve_recursion(xi, in.tau, noise_coefficient, in.x_star_norm, in.eps_norm,
                                                   in.horizon);
    out.bounds.noise_floor = std::numeric_limits<double>::quiet_NaN();
    if (std::abs(out.system.lambda1) >= 1.0)
      out.notes.push_back("|lambda1| >= 1: the recursion does not contract, no iteration bound");
    else
      out.notes.push_back("closed form needs tau >= 0 and xi*(1+2*tau) < 1; curve from the unrolled recursion");
  }
  return out;
}

} // namespace acciht
