#pragma once

// Serialization of solver traces, metrics, analysis reports and instance
// descriptors.
//
// Trace CSV columns: iter, f_value, step_norm, dist_to_truth, support.
// dist_to_truth is empty when unknown; support lists 1-based coordinate (or
// group) indices joined by ';' and is left empty for low-rank iterates.
// Reals are written with 17 significant digits so parsing reproduces them
// exactly.

#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "acciht/analysis.hpp"
#include "acciht/errors.hpp"
#include "acciht/models.hpp"
#include "acciht/problems.hpp"
#include "acciht/solvers.hpp"
#include "json.hpp"

namespace acciht::report {

using nlohmann::json;

struct TraceRow {
  std::size_t iter = 0;
  double f_value = 0.0;
  double step_norm = 0.0;
  std::optional<double> dist_to_truth;
  std::vector<Index> support;  // 0-based

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

template <class Support>
std::vector<Index> support_indices(const Support& s) {
  if constexpr (std::is_same_v<Support, SubspaceSupport>) {
    return {};
  } else {
    return s.ids;
  }
}

template <class Model>
std::vector<TraceRow> trace_rows(const SolverTrace<Model>& trace) {
  std::vector<TraceRow> rows;
  rows.reserve(trace.records.size());
  for (const auto& r : trace.records)
    rows.push_back({r.iter, r.f_value, r.step_norm, r.dist_to_truth, support_indices(r.support)});
  return rows;
}

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "iter,f_value,step_norm,dist_to_truth,support\n";
  for (const auto& r : rows) {
    out += std::to_string(r.iter);
    out += ',' + format_real(r.f_value);
    out += ',' + format_real(r.step_norm);
    out += ',';
    if (r.dist_to_truth) out += format_real(*r.dist_to_truth);
    out += ',';
    for (std::size_t j = 0; j < r.support.size(); ++j) {
      if (j) out += ';';
      out += std::to_string(r.support[j] + 1);
    }
    out += '\n';
  }
  return out;
}

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_real(std::string_view s) {
  // strtod handles inf/nan spellings produced by printf, unlike from_chars on some toolchains.
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw ValidationError("trace csv: malformed number '" + tmp + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ValidationError("trace csv: malformed integer '" + std::string(s) + "'");
  return v;
}

} // namespace detail

inline std::vector<TraceRow> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "iter,f_value,step_norm,dist_to_truth,support")
    throw ValidationError("trace csv: unexpected header");
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = detail::split(line, ',');
    if (cells.size() != 5) throw ValidationError("trace csv: expected 5 columns");
    TraceRow r;
    r.iter = detail::parse_int<std::size_t>(cells[0]);
    r.f_value = detail::parse_real(cells[1]);
    r.step_norm = detail::parse_real(cells[2]);
    if (!cells[3].empty()) r.dist_to_truth = detail::parse_real(cells[3]);
    if (!cells[4].empty())
      for (auto tok : detail::split(cells[4], ';')) r.support.push_back(detail::parse_int<Index>(tok) - 1);
    rows.push_back(std::move(r));
  }
  return rows;
}

// --- JSON ---

/// JSON numbers cannot hold inf/nan; those become null.
inline json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline const char* to_string(StepRule r) {
  switch (r) {
    case StepRule::fixed: return "fixed";
    case StepRule::inverse_smoothness: return "auto";
    case StepRule::line_search: return "line-search";
  }
  return "unknown";
}

inline json config_json(const SolverConfig& cfg) {
  json j;
  j["tau"] = cfg.tau;
  j["step_rule"] = to_string(cfg.step.rule);
  if (cfg.step.rule == StepRule::fixed) j["mu"] = cfg.step.value;
  j["eta"] = cfg.eta;
  j["max_iter"] = cfg.max_iter;
  j["debias"] = cfg.debias;
  if (cfg.kappa) j["kappa"] = *cfg.kappa;
  return j;
}

inline json metrics_json(const MetricsReport& m) {
  json j = json::object();
  if (m.r2_test) j["r2_test"] = real_or_null(*m.r2_test);
  if (m.support_auc) j["support_auc"] = *m.support_auc;
  if (m.train_loglik) j["train_loglik"] = real_or_null(*m.train_loglik);
  if (m.exact_support_match) j["exact_support_match"] = *m.exact_support_match;
  if (m.relative_error) j["relative_error"] = real_or_null(*m.relative_error);
  return j;
}

inline json descriptor_json(const GeneratorDescriptor& d) {
  json params = json::object();
  for (const auto& [k, v] : d.params) params[k] = v;
  return {{"generator", d.generator}, {"params", params}, {"seed", d.seed}};
}

inline GeneratorDescriptor parse_descriptor(const json& j) {
  try {
    GeneratorDescriptor d;
    d.generator = j.at("generator").get<std::string>();
    for (const auto& [k, v] : j.at("params").items()) d.params.emplace_back(k, v.get<double>());
    d.seed = j.at("seed").get<std::uint64_t>();
    return d;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("instance descriptor: ") + e.what());
  }
}

/// The JSON mirror of a trace: config echo, termination and per-iteration
/// series.
template <class Model>
json trace_json(const SolverTrace<Model>& trace, const SolverConfig& cfg, const std::string& solver) {
  json j;
  j["solver"] = solver;
  j["config"] = config_json(cfg);
  j["termination"] = to_string(trace.termination);
  j["iterations"] = trace.iterations();
  j["wall_seconds"] = trace.wall_seconds;
  j["warnings"] = trace.warnings;
  json recs = json::array();
  for (const auto& row : trace_rows(trace)) {
    json r;
    r["iter"] = row.iter;
    r["f_value"] = real_or_null(row.f_value);
    r["step_norm"] = real_or_null(row.step_norm);
    r["dist_to_truth"] = row.dist_to_truth ? real_or_null(*row.dist_to_truth) : json(nullptr);
    json s = json::array();
    for (Index i : row.support) s.push_back(i + 1);
    r["support"] = s;
    recs.push_back(std::move(r));
  }
  j["records"] = std::move(recs);
  return j;
}

inline json tau_range_json(const std::optional<TauInterval>& r) {
  return r ? json::array({r->lo, r->hi}) : json(nullptr);
}

/// The `analyze` report.
struct AnalysisReport {
  ContractionSystem system;
  BoundReport bounds;
  std::optional<RipConstants> rip;
  std::optional<LemmaConstants> lemma;
  std::vector<std::string> notes;
};

inline json analysis_json(const AnalysisReport& a) {
  json j;
  j["xi"] = a.system.xi;
  j["tau"] = a.system.tau;
  j["lambda1"] = a.system.lambda1;
  j["lambda2"] = a.system.lambda2;
  j["delta"] = a.system.delta;
  j["tau_range"] = tau_range_json(a.bounds.tau_range);
  j["iteration_bound"] = a.bounds.iteration_bound ? json(*a.bounds.iteration_bound) : json(nullptr);
  j["noise_floor"] = real_or_null(a.bounds.noise_floor);
  j["error_curve"] = a.bounds.error_curve;
  j["contracting"] = std::abs(a.system.lambda1) < 1.0;
  if (a.rip) {
    json levels = json::object();
    for (const auto& [s, p] : a.rip->levels) levels[std::to_string(s)] = {{"alpha", p.alpha}, {"beta", p.beta}};
    j["rip"] = {{"method", to_string(a.rip->method)}, {"levels", levels}};
  }
  if (a.lemma) {
    j["kappa"] = a.lemma->kappa();
    j["mu"] = a.lemma->mu();
  }
  j["notes"] = a.notes;
  return j;
}

} // namespace acciht::report
