// Command-line front end.
//
//   acciht solve          run accelerated (or plain) IHT on a generated or loaded instance
//   acciht tau-sweep      classify convergence over a grid of momentum values
//   acciht analyze        contraction analysis and error bounds
//   acciht counterexample momentum counterexample for exact line search
//   acciht gen            write a generated instance to files
//
// Exit codes: 0 ok, 2 invalid input, 3 divergence or numerical failure, 4 I/O.
// `--config FILE` reads a JSON object of option values; options given on the
// command line take precedence. A nested object keyed by a subcommand name
// applies only to that subcommand.

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "acciht/acciht.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace acciht;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

// ---------------------------------------------------------------------------
// Options

struct GenOptions {
  std::string gen;
  Index n = 2000, m = 600, k = 20;
  double sigma = 0.0;
  double rho = 0.4, snr = 10.0;
  Index p = 50, rank = 3;
  double frac = 0.35;
  std::uint64_t seed = 0;
};

struct FileOptions {
  std::string from_dir;
  std::string phi, b, truth, groups, mask;
};

struct SolveOptions {
  std::string solver = "acciht";
  double tau = 0.25;
  std::string mu = "auto";
  double eta = 1e-7;
  std::size_t max_iter = 10000;
  bool debias = false;
  std::optional<double> kappa;
};

void add_gen_options(CLI::App* app, GenOptions& g, bool required_gen, const std::string& default_gen) {
  g.gen = default_gen;
  auto* opt = app->add_option("--gen", g.gen, "Generator: iid, ar1, mc, toy")
                  ->check(CLI::IsMember({"iid", "ar1", "mc", "toy"}));
  if (required_gen) opt->required();
  app->add_option("--n", g.n, "Signal dimension (iid/ar1/toy) or matrix columns (mc)");
  app->add_option("--m", g.m, "Measurements (iid/toy) or total rows before the split (ar1)");
  app->add_option("--k", g.k, "Sparsity budget");
  app->add_option("--sigma", g.sigma, "Noise standard deviation (iid)");
  app->add_option("--rho", g.rho, "AR(1) coefficient (ar1)");
  app->add_option("--snr", g.snr, "Signal-to-noise ratio (ar1)");
  app->add_option("--p", g.p, "Matrix rows (mc)");
  app->add_option("--rank", g.rank, "Rank budget (mc)");
  app->add_option("--frac", g.frac, "Observed fraction (mc)");
  app->add_option("--seed", g.seed, "Random seed");
}

void add_file_options(CLI::App* app, FileOptions& f) {
  app->add_option("--from", f.from_dir, "Directory written by `gen`");
  app->add_option("--phi", f.phi, "Design matrix file");
  app->add_option("--b", f.b, "Observation vector file");
  app->add_option("--truth", f.truth, "Planted signal file (optional)");
  app->add_option("--groups", f.groups, "Group partition JSON (1-based); selects the block model");
  app->add_option("--mask", f.mask, "Mask file for matrix completion");
}

void add_solver_options(CLI::App* app, SolveOptions& s) {
  app->add_option("--solver", s.solver, "acciht or iht")->check(CLI::IsMember({"acciht", "iht"}));
  app->add_option("--tau", s.tau, "Momentum");
  app->add_option("--mu", s.mu, "Step size: auto, line-search, rip or a positive number");
  app->add_option("--eta", s.eta, "Relative stopping tolerance");
  app->add_option("--max-iter", s.max_iter, "Iteration limit");
  app->add_flag("--debias", s.debias, "Least-squares refit on each new support");
  app->add_option("--kappa", s.kappa, "Condition number used to check tau against the guaranteed range");
}

// ---------------------------------------------------------------------------
// JSON config: merged into argv so that explicit flags win.

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  return v.dump();
}

void append_config(std::vector<std::string>& args, const json& obj, const std::vector<std::string>& present) {
  for (const auto& [key, value] : obj.items()) {
    if (value.is_object()) continue;
    const std::string flag = "--" + key;
    if (std::find(present.begin(), present.end(), flag) != present.end()) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      args.push_back(flag);
      for (const auto& v : value) args.push_back(scalar_text(v));
    } else if (!value.is_null()) {
      args.push_back(flag);
      args.push_back(scalar_text(value));
    }
  }
}

/// Returns argv with config-file values appended after explicit arguments.
std::vector<std::string> merge_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::string path;
  std::vector<std::string> kept{args[0]};
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      kept.push_back(args[i]);
    }
  }
  if (path.empty()) return kept;
  json cfg;
  try {
    cfg = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw ValidationError("config " + path + ": expected a JSON object");
  std::vector<std::string> present;
  for (const auto& a : kept)
    if (a.rfind("--", 0) == 0) present.push_back(a.substr(0, a.find('=')));
  std::string sub;
  for (std::size_t i = 1; i < kept.size(); ++i)
    if (kept[i].rfind("-", 0) != 0) {
      sub = kept[i];
      break;
    }
  if (sub.empty() && cfg.contains("subcommand") && cfg["subcommand"].is_string()) {
    sub = cfg["subcommand"].get<std::string>();
    kept.insert(kept.begin() + 1, sub);
  }
  json flat = cfg;
  flat.erase("subcommand");
  append_config(kept, flat, present);
  if (!sub.empty() && cfg.contains(sub) && cfg[sub].is_object()) append_config(kept, cfg[sub], present);
  return kept;
}

// ---------------------------------------------------------------------------
// Output handling: everything is staged in memory and written at the end; if
// any write fails, files already written by this command are removed.

class OutputSet {
public:
  void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }

  void commit() {
    std::vector<fs::path> done;
    try {
      for (const auto& [path, content] : files_) {
        io::write_file_atomic(path, content);
        done.push_back(path);
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : done) fs::remove(p, ec);
      throw;
    }
  }

private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

/// Fails early (before any computation) when an output location is unusable.
void check_writable_dir(const fs::path& dir) {
  const fs::path d = dir.empty() ? fs::path(".") : dir;
  if (!fs::is_directory(d)) throw IoError("output directory does not exist: " + d.string());
  if (::access(d.c_str(), W_OK) != 0) throw IoError("output directory is not writable: " + d.string());
}

fs::path with_suffix(const std::string& prefix, const std::string& suffix) { return fs::path(prefix + suffix); }

// ---------------------------------------------------------------------------
// Instances

using BlockInstance = ProblemInstance<LeastSquares, BlockModel>;

struct SparseProblem {
  SparseRegressionInstance train;
  std::optional<SparseRegressionInstance> test;
};

using Problem = std::variant<SparseProblem, BlockInstance, MatrixCompletionInstance>;

void require_k(Index k, Index n) {
  detail::require(k >= 1 && k <= n, "--k must lie in [1, n]");
}

Problem generate(const GenOptions& g) {
  if (g.gen == "iid") return SparseProblem{gen_iid_gaussian(g.n, g.m, g.k, g.sigma, g.seed), std::nullopt};
  if (g.gen == "toy") return SparseProblem{gen_toy(g.seed, g.n, g.m, g.k), std::nullopt};
  if (g.gen == "ar1") {
    auto [train, test] = gen_ar1(g.n, g.m, g.k, g.rho, g.snr, g.seed);
    return SparseProblem{std::move(train), std::move(test)};
  }
  return gen_matrix_completion(g.p, g.n, g.rank, g.frac, g.seed);
}

/// Applies generator defaults that differ between generators when the user
/// did not set them explicitly.
void apply_generator_defaults(GenOptions& g, const CLI::App* app) {
  auto unset = [&](const char* name) { return app->count(name) == 0; };
  if (g.gen == "toy") {
    if (unset("--n")) g.n = 10;
    if (unset("--m")) g.m = 6;
    if (unset("--k")) g.k = 2;
  } else if (g.gen == "ar1") {
    if (unset("--n")) g.n = 200;
    if (unset("--m")) g.m = 800;
  } else if (g.gen == "mc") {
    if (unset("--n")) g.n = 60;
  }
}

std::optional<double> descriptor_param(const GeneratorDescriptor& d, const std::string& key) {
  for (const auto& [k, v] : d.params)
    if (k == key) return v;
  return std::nullopt;
}

/// `k_flag` and `rank_flag` are 0 when not given on the command line.
Problem load_from_files(const FileOptions& f, Index k_flag, Index rank_flag) {
  FileOptions files = f;
  std::optional<GeneratorDescriptor> desc;
  if (!f.from_dir.empty()) {
    const fs::path dir(f.from_dir);
    desc = report::parse_descriptor(json::parse(io::read_file(dir / "descriptor.json"), nullptr, false));
    if (fs::exists(dir / "mask.txt")) {
      files.mask = (dir / "mask.txt").string();
    } else {
      files.phi = (dir / "phi.txt").string();
      files.b = (dir / "b.txt").string();
    }
    if (fs::exists(dir / "truth.txt") && files.truth.empty()) files.truth = (dir / "truth.txt").string();
  }
  GeneratorDescriptor d = desc.value_or(GeneratorDescriptor{"files", {}, 0});

  if (!files.mask.empty()) {
    auto obj = io::load_mask(files.mask);
    std::optional<Index> r;
    if (rank_flag > 0) r = rank_flag;
    if (!r && desc) {
      if (auto v = descriptor_param(*desc, "r")) r = static_cast<Index>(*v);
    }
    detail::require(r.has_value(), "--rank is required with a mask file");
    LowRankModel model(obj.rows(), obj.cols(), *r);
    std::optional<Matrix> truth;
    if (!files.truth.empty()) {
      truth = io::load_matrix(files.truth);
      model.check_shape(*truth);
    }
    return MatrixCompletionInstance{std::move(obj), model, std::move(truth), std::nullopt, d};
  }

  detail::require(!files.phi.empty() && !files.b.empty(), "give --gen, --from, --mask or both --phi and --b");
  LeastSquares ls(io::load_matrix(files.phi), io::load_vector(files.b));
  std::optional<Vector> truth;
  if (!files.truth.empty()) truth = io::load_vector(files.truth);
  std::optional<Index> k;
  if (k_flag > 0) k = k_flag;
  if (!k && desc) {
    if (auto v = descriptor_param(*desc, "k")) k = static_cast<Index>(*v);
  }
  detail::require(k.has_value(), "--k is required with file inputs");
  if (!files.groups.empty()) {
    BlockModel model(io::parse_groups(io::read_file(files.groups), files.groups), *k);
    detail::require(model.dimension() == ls.dimension(), "group partition does not cover the design columns");
    if (truth) model.check_shape(*truth);
    return BlockInstance{std::move(ls), std::move(model), std::move(truth), std::nullopt, d};
  }
  require_k(*k, ls.dimension());
  SparseModel model(ls.dimension(), *k);
  if (truth) model.check_shape(*truth);
  return SparseProblem{SparseRegressionInstance{std::move(ls), model, std::move(truth), std::nullopt, d},
                       std::nullopt};
}

// ---------------------------------------------------------------------------
// Solver configuration

SolverConfig make_config(const SolveOptions& s) {
  SolverConfig cfg;
  cfg.tau = s.tau;
  cfg.eta = s.eta;
  cfg.max_iter = s.max_iter;
  cfg.debias = s.debias;
  cfg.kappa = s.kappa;
  if (s.mu == "auto") {
    cfg.step = StepSize::automatic();
  } else if (s.mu == "line-search") {
    cfg.step = StepSize::line_search();
  } else if (s.mu == "rip") {
    cfg.step = StepSize::fixed(1.0);  // resolved per instance
  } else {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s.mu, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    detail::require(used == s.mu.size() && v > 0.0 && std::isfinite(v),
                    "--mu must be auto, line-search, rip or a positive number");
    cfg.step = StepSize::fixed(v);
  }
  cfg.validate();
  return cfg;
}

/// μ = 2/(α₃ₖ + β₃ₖ) from enumerated restricted constants.
void resolve_rip_step(SolverConfig& cfg, const LeastSquares& ls, Index k) {
  detail::require(3 * k <= ls.dimension(), "--mu rip needs 3k <= n");
  const auto lc = lemma_constants(rip_constants_exact(ls.design(), k), k);
  cfg.step = StepSize::fixed(lc.mu());
}

template <class O, class Model>
SolverTrace<Model> run_solver(const std::string& solver, const O& obj, const Model& model, const SolverConfig& cfg,
                              const std::optional<typename Model::signal_type>& truth) {
  return solver == "iht" ? iht(obj, model, cfg, truth) : acc_iht(obj, model, cfg, truth);
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_solve(const GenOptions& g, const FileOptions& f, const SolveOptions& s, const std::string& out,
              const CLI::App* app) {
  check_writable_dir(fs::path(out).parent_path());
  SolverConfig cfg = make_config(s);
  const Index k_flag = app->count("--k") ? g.k : 0;
  const Index r_flag = app->count("--rank") ? g.rank : 0;
  const Problem problem = g.gen.empty() ? load_from_files(f, k_flag, r_flag) : generate(g);

  OutputSet outputs;
  json summary;
  Termination term = Termination::converged;
  const std::string solver = s.solver;
  auto finish = [&](const auto& trace, const MetricsReport& metrics, const GeneratorDescriptor& desc) {
    outputs.add(with_suffix(out, ".csv"), report::format_trace_csv(report::trace_rows(trace)));
    SolverConfig echo = cfg;
    if (solver == "iht") echo.tau = 0.0;
    summary = report::trace_json(trace, echo, solver);
    summary.erase("records");
    summary["metrics"] = report::metrics_json(metrics);
    summary["instance"] = report::descriptor_json(desc);
    summary["final_f"] = report::real_or_null(trace.records.back().f_value);
    term = trace.termination;
  };

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SparseProblem>) {
          if (s.mu == "rip") resolve_rip_step(cfg, p.train.objective, p.train.model.budget());
          const auto trace = run_solver(solver, p.train.objective, p.train.model, cfg, p.train.truth);
          finish(trace, evaluate(trace, p.train, p.test ? &*p.test : nullptr), p.train.descriptor);
        } else if constexpr (std::is_same_v<P, BlockInstance>) {
          detail::require(s.mu != "rip", "--mu rip is available for the sparse model only");
          const auto trace = run_solver(solver, p.objective, p.model, cfg, p.truth);
          finish(trace, evaluate(trace, p), p.descriptor);
        } else {
          detail::require(s.mu != "rip", "--mu rip is available for the sparse model only");
          const auto trace = run_solver(solver, p.objective, p.model, cfg, p.truth);
          finish(trace, evaluate(trace, p), p.descriptor);
        }
      },
      problem);

  outputs.add(with_suffix(out, ".json"), summary.dump(2) + "\n");
  outputs.commit();
  std::cout << "termination: " << to_string(term) << ", iterations: " << summary["iterations"] << "\n";
  if (summary["metrics"].contains("relative_error"))
    std::cout << "relative_error: " << summary["metrics"]["relative_error"] << "\n";
  if (summary["metrics"].contains("exact_support_match"))
    std::cout << "exact_support_match: " << summary["metrics"]["exact_support_match"] << "\n";
  return term == Termination::diverged ? kExitDivergence : kExitOk;
}

int cmd_tau_sweep(const GenOptions& g, const FileOptions& f, const SolveOptions& s, const std::string& out,
                  const std::vector<double>& taus, double tau_min, double tau_max, double tau_step,
                  std::size_t reps, const CLI::App* app) {
  check_writable_dir(fs::path(out).parent_path());
  detail::require(reps >= 1, "--reps must be >= 1");
  SolverConfig base = make_config(s);
  const std::vector<double> grid = taus.empty() ? linear_grid(tau_min, tau_max, tau_step) : taus;

  std::vector<std::pair<std::uint64_t, SparseRegressionInstance>> instances;
  if (g.gen.empty()) {
    auto p = load_from_files(f, app->count("--k") ? g.k : 0, 0);
    auto* sp = std::get_if<SparseProblem>(&p);
    detail::require(sp != nullptr, "tau-sweep needs a sparse least-squares instance");
    detail::require(reps == 1, "--reps applies to generated instances only");
    instances.emplace_back(0, std::move(sp->train));
  } else {
    detail::require(g.gen != "mc", "tau-sweep needs a sparse least-squares generator");
    for (std::size_t r = 0; r < reps; ++r) {
      GenOptions gr = g;
      gr.seed = g.seed + r;
      auto p = generate(gr);
      instances.emplace_back(gr.seed, std::move(std::get<SparseProblem>(p).train));
    }
  }

  std::string csv = "rep,seed,tau,regime,iterations,final_f,final_error,in_guaranteed_range\n";
  json summary;
  summary["config"] = report::config_json(base);
  summary["config"].erase("tau");
  summary["grid"] = grid;
  summary["reps"] = json::array();
  std::map<std::string, std::map<double, int>> counts;
  for (std::size_t r = 0; r < instances.size(); ++r) {
    const auto& [seed, inst] = instances[r];
    SolverConfig cfg = base;
    if (s.mu == "rip") resolve_rip_step(cfg, inst.objective, inst.model.budget());
    const auto rep = tau_sweep(inst, grid, cfg);
    json jr;
    jr["seed"] = seed;
    jr["instance"] = report::descriptor_json(inst.descriptor);
    jr["tau_range"] = report::tau_range_json(rep.tau_range);
    if (rep.lemma) {
      jr["xi"] = rep.lemma->xi();
      jr["alpha_3k"] = rep.lemma->alpha_3k;
      jr["beta_3k"] = rep.lemma->beta_3k;
    }
    jr["notes"] = rep.notes;
    summary["reps"].push_back(jr);
    for (const auto& row : rep.rows) {
      csv += std::to_string(r) + "," + std::to_string(seed) + "," + report::format_real(row.tau) + "," +
             to_string(row.regime) + "," + std::to_string(row.iterations) + "," + report::format_real(row.final_f) +
             "," + (row.final_error ? report::format_real(*row.final_error) : "") + "," +
             (row.in_guaranteed_range ? "1" : "0") + "\n";
      counts[to_string(row.regime)][row.tau] += 1;
    }
  }
  json table = json::array();
  for (double tau : grid) {
    json t{{"tau", tau}};
    for (Regime r : {Regime::converged_monotone, Regime::converged_rippling, Regime::diverged, Regime::not_converged}) {
      const auto& by_tau = counts[to_string(r)];
      auto it = by_tau.find(tau);
      t[to_string(r)] = it == by_tau.end() ? 0 : it->second;
    }
    table.push_back(t);
  }
  summary["regime_counts"] = table;

  OutputSet outputs;
  outputs.add(with_suffix(out, ".csv"), csv);
  outputs.add(with_suffix(out, ".json"), summary.dump(2) + "\n");
  outputs.commit();
  for (const auto& t : table) std::cout << t.dump() << "\n";
  return kExitOk;
}

int cmd_analyze(AnalyzeInput in, const std::string& phi_path, const std::string& out) {
  if (!out.empty()) check_writable_dir(fs::path(out).parent_path());
  if (!phi_path.empty()) in.phi = io::load_matrix(phi_path);
  const auto rep = analyze(in);
  const std::string text = report::analysis_json(rep).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    OutputSet o;
    o.add(out, text);
    o.commit();
  }
  return kExitOk;
}

int cmd_counterexample(std::size_t points, const std::string& out) {
  if (!out.empty()) check_writable_dir(fs::path(out).parent_path());
  const auto rep = counterexample(points);
  std::printf("||b - Phi x1||_2 = %.6f\n", rep.residual_x1);
  std::printf("||b - Phi x2||_2 = %.6f\n", rep.residual_x2);
  std::printf("tau* (exact line search) = %.6f\n", rep.tau_star);
  std::printf("tau f(x2 + tau (x2 - x1))\n");
  for (std::size_t i = 0; i < rep.tau_grid.size(); ++i) std::printf("%.2f %.10f\n", rep.tau_grid[i], rep.f_curve[i]);
  std::printf("f strictly increasing on (0, 1]: %s\n", rep.strictly_increasing ? "yes" : "no");
  if (!out.empty()) {
    json j{{"residual_x1", rep.residual_x1}, {"residual_x2", rep.residual_x2}, {"tau_star", rep.tau_star},
           {"tau", rep.tau_grid}, {"f", rep.f_curve}, {"strictly_increasing", rep.strictly_increasing}};
    OutputSet o;
    o.add(out, j.dump(2) + "\n");
    o.commit();
  }
  return rep.strictly_increasing ? kExitOk : kExitDivergence;
}

int cmd_gen(const GenOptions& g, const std::string& out_dir) {
  const fs::path dir(out_dir);
  check_writable_dir(dir);
  const Problem problem = generate(g);
  OutputSet outputs;
  auto add_sparse = [&](const SparseRegressionInstance& inst, const std::string& prefix) {
    outputs.add(dir / (prefix + "phi.txt"), io::format_matrix(inst.objective.design()));
    outputs.add(dir / (prefix + "b.txt"), io::format_vector(inst.objective.observations()));
    if (inst.truth) outputs.add(dir / (prefix + "truth.txt"), io::format_vector(*inst.truth));
    if (inst.noise) outputs.add(dir / (prefix + "noise.txt"), io::format_vector(*inst.noise));
  };
  json desc;
  if (const auto* sp = std::get_if<SparseProblem>(&problem)) {
    add_sparse(sp->train, "");
    if (sp->test) add_sparse(*sp->test, "test_");
    desc = report::descriptor_json(sp->train.descriptor);
  } else if (const auto* mc = std::get_if<MatrixCompletionInstance>(&problem)) {
    outputs.add(dir / "mask.txt", io::format_mask(mc->objective));
    if (mc->truth) outputs.add(dir / "truth.txt", io::format_matrix(*mc->truth));
    desc = report::descriptor_json(mc->descriptor);
  }
  outputs.add(dir / "descriptor.json", desc.dump(2) + "\n");
  outputs.commit();
  std::cout << "wrote instance to " << dir.string() << "\n";
  return kExitOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Accelerated iterative hard thresholding"};
  app.require_subcommand(1);

  GenOptions gen;
  FileOptions files;
  SolveOptions solve;
  std::string out = "trace";

  auto* solve_cmd = app.add_subcommand("solve", "Run the solver on one instance");
  add_gen_options(solve_cmd, gen, false, "");
  add_file_options(solve_cmd, files);
  add_solver_options(solve_cmd, solve);
  solve_cmd->add_option("--out", out, "Output prefix: writes PREFIX.csv and PREFIX.json");

  std::vector<double> taus;
  double tau_min = -2.0, tau_max = 1.0, tau_step = 0.1;
  std::size_t reps = 1;
  std::string sweep_out = "sweep";
  GenOptions sweep_gen;
  FileOptions sweep_files;
  SolveOptions sweep_solve;
  auto* sweep_cmd = app.add_subcommand("tau-sweep", "Classify convergence over a momentum grid");
  add_gen_options(sweep_cmd, sweep_gen, false, "toy");
  add_file_options(sweep_cmd, sweep_files);
  add_solver_options(sweep_cmd, sweep_solve);
  sweep_cmd->add_option("--taus", taus, "Explicit momentum values");
  sweep_cmd->add_option("--tau-min", tau_min, "Grid start");
  sweep_cmd->add_option("--tau-max", tau_max, "Grid end");
  sweep_cmd->add_option("--tau-step", tau_step, "Grid spacing");
  sweep_cmd->add_option("--reps", reps, "Instances (seeds seed, seed+1, ...)");
  sweep_cmd->add_option("--out", sweep_out, "Output prefix: writes PREFIX.csv and PREFIX.json");

  AnalyzeInput an;
  std::string an_phi, an_out;
  double an_xi = 0.0, an_kappa = 0.0;
  auto* an_cmd = app.add_subcommand("analyze", "Contraction analysis and error bounds");
  auto* xi_opt = an_cmd->add_option("--xi", an_xi, "Contraction coefficient");
  auto* kappa_opt = an_cmd->add_option("--kappa", an_kappa, "Restricted condition number");
  auto* phi_opt = an_cmd->add_option("--phi", an_phi, "Design matrix file (constants by enumeration)");
  xi_opt->excludes(kappa_opt)->excludes(phi_opt);
  kappa_opt->excludes(phi_opt);
  an_cmd->add_option("--k", an.k, "Sparsity (with --phi)");
  an_cmd->add_option("--tau", an.tau, "Momentum");
  an_cmd->add_option("--horizon", an.horizon, "Error curve length");
  an_cmd->add_option("--x-norm", an.x_star_norm, "Norm of the planted signal");
  an_cmd->add_option("--eps-norm", an.eps_norm, "Norm of the noise");
  an_cmd->add_option("--zeta", an.zeta, "Target error for the iteration count");
  an_cmd->add_flag("--surrogate", an.allow_surrogate, "Allow eigenvalue bounds when enumeration is too large");
  an_cmd->add_option("--out", an_out, "Write the JSON report here instead of stdout");

  std::size_t points = 101;
  std::string ce_out;
  auto* ce_cmd = app.add_subcommand("counterexample", "Momentum counterexample for exact line search");
  ce_cmd->add_option("--points", points, "Grid points on [0, 1]");
  ce_cmd->add_option("--out", ce_out, "Also write the report as JSON");

  GenOptions gen_only;
  std::string gen_dir = ".";
  auto* gen_cmd = app.add_subcommand("gen", "Write a generated instance to files");
  add_gen_options(gen_cmd, gen_only, true, "");
  gen_cmd->add_option("--out-dir", gen_dir, "Existing directory for the instance files");

  const auto args = merge_config(argc, argv);
  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  if (*solve_cmd) {
    if (!gen.gen.empty()) apply_generator_defaults(gen, solve_cmd);
    return cmd_solve(gen, files, solve, out, solve_cmd);
  }
  if (*sweep_cmd) {
    const bool from_files = !sweep_files.from_dir.empty() || !sweep_files.phi.empty();
    if (from_files && sweep_cmd->count("--gen") == 0) sweep_gen.gen.clear();
    if (!sweep_gen.gen.empty()) apply_generator_defaults(sweep_gen, sweep_cmd);
    return cmd_tau_sweep(sweep_gen, sweep_files, sweep_solve, sweep_out, taus, tau_min, tau_max, tau_step, reps,
                         sweep_cmd);
  }
  if (*an_cmd) {
    if (*xi_opt) an.xi = an_xi;
    if (*kappa_opt) an.kappa = an_kappa;
    return cmd_analyze(an, an_phi, an_out);
  }
  if (*ce_cmd) return cmd_counterexample(points, ce_out);
  apply_generator_defaults(gen_only, gen_cmd);
  return cmd_gen(gen_only, gen_dir);
}

} // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
