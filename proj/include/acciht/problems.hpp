#pragma once

// Seeded synthetic problems and recovery metrics.
//
// Random streams: every generator draws from std::mt19937_64 engines, one per
// quantity (design, support, values, noise, split, mask, factors). The engine
// for stream s under seed σ is seeded with splitmix64(σ ⊕ splitmix64(s)).
// Reruns with the same seed are bit-identical within one build; normal
// deviates come from std::normal_distribution, so other standard libraries
// may produce different (identically distributed) draws.

#include <algorithm>
#include <concepts>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "acciht/errors.hpp"
#include "acciht/models.hpp"
#include "acciht/numerics.hpp"
#include "acciht/objectives.hpp"
#include "acciht/solvers.hpp"

namespace acciht {

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum class Stream : std::uint64_t { design = 1, support = 2, values = 3, noise = 4, split = 5, mask = 6, factors = 7 };

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

inline Matrix standard_normal(Index rows, Index cols, std::mt19937_64& eng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  // Fill row by row so the draw order does not depend on storage order.
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = nd(eng);
  return m;
}

inline Vector standard_normal(Index n, std::mt19937_64& eng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = nd(eng);
  return v;
}

/// Generator name, its parameters (in declaration order) and the seed.
struct GeneratorDescriptor {
  std::string generator;
  std::vector<std::pair<std::string, double>> params;
  std::uint64_t seed = 0;
};

template <class O, class Model>
struct ProblemInstance {
  O objective;
  Model model;
  std::optional<typename Model::signal_type> truth;
  std::optional<Vector> noise;
  GeneratorDescriptor descriptor;
};

using SparseRegressionInstance = ProblemInstance<LeastSquares, SparseModel>;
using MatrixCompletionInstance = ProblemInstance<MaskedLeastSquares, LowRankModel>;

namespace detail {

/// Unit-norm k-sparse vector with normal nonzeros on a uniformly random support.
inline Vector planted_sparse(Index n, Index k, std::uint64_t seed) {
  auto eng_s = make_engine(seed, Stream::support);
  std::vector<Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::shuffle(idx.begin(), idx.end(), eng_s);
  idx.resize(static_cast<std::size_t>(k));
  std::sort(idx.begin(), idx.end());

  auto eng_v = make_engine(seed, Stream::values);
  std::normal_distribution<double> nd(0.0, 1.0);
  Vector x = Vector::Zero(n);
  for (Index i : idx) {
    double v = 0.0;
    while (v == 0.0) v = nd(eng_v);
    x(i) = v;
  }
  return x / x.norm();
}

inline SparseRegressionInstance iid_instance(Index n, Index m, Index k, double noise_sigma, std::uint64_t seed,
                                             double entry_scale, std::string name) {
  require(n >= 1 && m >= 1, "gen_iid_gaussian: dimensions must be positive");
  require(k >= 1 && k <= n, "gen_iid_gaussian: need 1 <= k <= n");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "gen_iid_gaussian: sigma must be >= 0");
  auto eng_d = make_engine(seed, Stream::design);
  Matrix phi = standard_normal(m, n, eng_d);
  if (entry_scale != 1.0) phi *= entry_scale;
  Vector truth = planted_sparse(n, k, seed);
  auto eng_n = make_engine(seed, Stream::noise);
  Vector noise = noise_sigma * standard_normal(m, eng_n);
  Vector b = phi * truth + noise;
  GeneratorDescriptor desc{std::move(name),
                           {{"n", double(n)}, {"m", double(m)}, {"k", double(k)}, {"sigma", noise_sigma}},
                           seed};
  return {LeastSquares(std::move(phi), std::move(b)), SparseModel(n, k), std::move(truth), std::move(noise),
          std::move(desc)};
}

} // namespace detail

/// Φ with i.i.d. N(0,1) entries, unit-norm k-sparse x★, b = Φx★ + σ·z.
inline SparseRegressionInstance gen_iid_gaussian(Index n, Index m, Index k, double noise_sigma, std::uint64_t seed) {
  return detail::iid_instance(n, m, k, noise_sigma, seed, 1.0, "iid");
}

/// Small noiseless instance with N(0, 1/m) entries (unit expected column
/// norm), used for momentum sweeps where restricted constants can be
/// enumerated. Defaults: n = 10, m = 6, k = 2.
inline SparseRegressionInstance gen_toy(std::uint64_t seed, Index n = 10, Index m = 6, Index k = 2) {
  detail::require(m >= 1, "gen_toy: m must be positive");
  return detail::iid_instance(n, m, k, 0.0, seed, 1.0 / std::sqrt(static_cast<double>(m)), "toy");
}

/// Correlated design: rows follow a stationary AR(1) process with
/// coefficient rho, columns are scaled to unit norm, the noise is rescaled
/// to an exact signal-to-noise ratio, and rows are split 50-50 by a seeded
/// permutation. Returns (train, test).
inline std::pair<SparseRegressionInstance, SparseRegressionInstance> gen_ar1(Index n, Index m_total, Index k,
                                                                             double rho, double snr,
                                                                             std::uint64_t seed) {
  detail::require(n >= 1 && m_total >= 2, "gen_ar1: need n >= 1 and at least two rows");
  detail::require(k >= 1 && k <= n, "gen_ar1: need 1 <= k <= n");
  detail::require(rho >= 0.0 && rho < 1.0, "gen_ar1: rho must lie in [0, 1)");
  detail::require(snr > 0.0 && std::isfinite(snr), "gen_ar1: snr must be > 0");

  auto eng_d = make_engine(seed, Stream::design);
  std::normal_distribution<double> nd(0.0, 1.0);
  const double innov = std::sqrt(1.0 - rho * rho);
  Matrix phi(m_total, n);
  for (Index i = 0; i < m_total; ++i) {
    phi(i, 0) = nd(eng_d);
    for (Index j = 1; j < n; ++j) phi(i, j) = rho * phi(i, j - 1) + innov * nd(eng_d);
  }
  for (Index j = 0; j < n; ++j) phi.col(j) /= phi.col(j).norm();

  Vector truth = detail::planted_sparse(n, k, seed);
  auto eng_n = make_engine(seed, Stream::noise);
  Vector noise = standard_normal(m_total, eng_n);
  const double signal_energy = (phi * truth).squaredNorm();
  noise *= std::sqrt(signal_energy / (snr * noise.squaredNorm()));

  auto eng_p = make_engine(seed, Stream::split);
  std::vector<Index> rows(static_cast<std::size_t>(m_total));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::shuffle(rows.begin(), rows.end(), eng_p);
  const Index m_train = m_total / 2;

  auto part = [&](Index begin, Index end, const char* name) {
    std::vector<Index> sel(rows.begin() + begin, rows.begin() + end);
    std::sort(sel.begin(), sel.end());
    Matrix p(static_cast<Index>(sel.size()), n);
    Vector e(static_cast<Index>(sel.size()));
    for (std::size_t r = 0; r < sel.size(); ++r) {
      p.row(static_cast<Index>(r)) = phi.row(sel[r]);
      e(static_cast<Index>(r)) = noise(sel[r]);
    }
    Vector b = p * truth + e;
    GeneratorDescriptor desc{name,
                             {{"n", double(n)}, {"m_total", double(m_total)}, {"k", double(k)}, {"rho", rho},
                              {"snr", snr}},
                             seed};
    return SparseRegressionInstance{LeastSquares(std::move(p), std::move(b)), SparseModel(n, k), truth,
                                    std::move(e), std::move(desc)};
  };
  return {part(0, m_train, "ar1-train"), part(m_train, m_total, "ar1-test")};
}

/// X★ = L·R with standard-normal factors (p×r, r×n); ⌊frac·p·n⌋ entries
/// observed uniformly at random without replacement.
inline MatrixCompletionInstance gen_matrix_completion(Index p, Index n, Index r, double observe_frac,
                                                      std::uint64_t seed) {
  detail::require(p >= 1 && n >= 1, "gen_matrix_completion: dimensions must be positive");
  detail::require(r >= 1 && r <= std::min(p, n), "gen_matrix_completion: need 1 <= r <= min(p, n)");
  detail::require(observe_frac > 0.0 && observe_frac <= 1.0, "gen_matrix_completion: frac must lie in (0, 1]");
  auto eng_f = make_engine(seed, Stream::factors);
  const Matrix left = standard_normal(p, r, eng_f);
  const Matrix right = standard_normal(r, n, eng_f);
  Matrix truth = left * right;

  const auto total = p * n;
  const auto m_obs = static_cast<Index>(std::floor(observe_frac * static_cast<double>(total)));
  detail::require(m_obs >= 1, "gen_matrix_completion: fraction observes no entries");
  auto eng_m = make_engine(seed, Stream::mask);
  std::vector<Index> lin(static_cast<std::size_t>(total));
  std::iota(lin.begin(), lin.end(), Index{0});
  std::shuffle(lin.begin(), lin.end(), eng_m);
  lin.resize(static_cast<std::size_t>(m_obs));
  std::sort(lin.begin(), lin.end());

  std::vector<MaskEntry> mask;
  mask.reserve(lin.size());
  Vector values(m_obs);
  for (std::size_t t = 0; t < lin.size(); ++t) {
    const MaskEntry e{lin[t] / n, lin[t] % n};
    mask.push_back(e);
    values(static_cast<Index>(t)) = truth(e.row, e.col);
  }
  GeneratorDescriptor desc{"matrix-completion",
                           {{"p", double(p)}, {"n", double(n)}, {"r", double(r)}, {"frac", observe_frac}},
                           seed};
  return {MaskedLeastSquares(p, n, std::move(mask), std::move(values)), LowRankModel(p, n, r), std::move(truth),
          std::nullopt, std::move(desc)};
}

// ---------------------------------------------------------------------------
// Metrics

struct MetricsReport {
  std::optional<double> r2_test;
  std::optional<double> support_auc;
  std::optional<double> train_loglik;
  std::optional<bool> exact_support_match;
  std::optional<double> relative_error;
};

/// Area under the ROC curve of `scores` against binary `labels`:
/// P(score⁺ > score⁻) + ½·P(tie), computed from midranks. nullopt when one
/// class is empty.
inline std::optional<double> roc_auc(const Vector& scores, const std::vector<bool>& labels) {
  detail::require(static_cast<std::size_t>(scores.size()) == labels.size(), "roc_auc: size mismatch");
  const auto n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    return scores(static_cast<Index>(a)) < scores(static_cast<Index>(b));
  });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores(static_cast<Index>(order[j])) == scores(static_cast<Index>(order[i]))) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1..j
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]]) rank_sum += midrank;
    i = j;
  }
  for (bool l : labels) pos += l ? 1 : 0;
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

/// R² = 1 − SSE/SST of predictions Φx̂ against b.
inline double r_squared(const LeastSquares& ls, const Vector& x) {
  const Vector& b = ls.observations();
  const double sst = (b.array() - b.mean()).matrix().squaredNorm();
  detail::require(sst > 0.0, "r_squared: observations have zero variance");
  return 1.0 - ls.residual(x).squaredNorm() / sst;
}

/// Training fit as a unit-variance Gaussian log likelihood,
/// −½‖b − Φx̂‖² − (m/2)·log 2π.
inline double gaussian_loglik(const LeastSquares& ls, const Vector& x) {
  const auto m = static_cast<double>(ls.observations().size());
  return -0.5 * ls.residual(x).squaredNorm() - 0.5 * m * std::log(2.0 * std::numbers::pi);
}

/// Metrics for vector-valued least-squares instances (sparse or block).
/// Support AUC scores coordinates by |x̂| against the true nonzeros; the
/// exact match compares active supports under the instance's model.
template <class Model>
  requires std::same_as<typename Model::signal_type, Vector>
MetricsReport evaluate(const Vector& estimate, const ProblemInstance<LeastSquares, Model>& inst,
                       const ProblemInstance<LeastSquares, Model>* test = nullptr) {
  MetricsReport rep;
  inst.model.check_shape(estimate);
  rep.train_loglik = gaussian_loglik(inst.objective, estimate);
  if (test) rep.r2_test = r_squared(test->objective, estimate);
  if (inst.truth) {
    const Vector& t = *inst.truth;
    const double tn = t.norm();
    rep.relative_error = tn > 0.0 ? (estimate - t).norm() / tn : (estimate - t).norm();
    std::vector<bool> labels(static_cast<std::size_t>(t.size()));
    for (Index i = 0; i < t.size(); ++i) labels[static_cast<std::size_t>(i)] = t(i) != 0.0;
    rep.support_auc = roc_auc(estimate.cwiseAbs(), labels);
    rep.exact_support_match = inst.model.active_support(estimate) == inst.model.active_support(t);
  }
  return rep;
}

inline MetricsReport evaluate(const Matrix& estimate, const MatrixCompletionInstance& inst) {
  MetricsReport rep;
  inst.model.check_shape(estimate);
  if (inst.truth) {
    const double tn = inst.truth->norm();
    rep.relative_error = tn > 0.0 ? (estimate - *inst.truth).norm() / tn : (estimate - *inst.truth).norm();
  }
  return rep;
}

template <class Model, class Inst, class... Rest>
MetricsReport evaluate(const SolverTrace<Model>& trace, const Inst& inst, Rest&&... rest) {
  return evaluate(trace.solution, inst, std::forward<Rest>(rest)...);
}

} // namespace acciht
