#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "acciht/io.hpp"
#include "acciht/problems.hpp"
#include "acciht/report.hpp"
#include "acciht/solvers.hpp"
#include "oracles.hpp"

using namespace acciht;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() /
                   ("acciht_io_" + std::to_string(::getpid()) + "_" +
                    ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST(MatrixText, RoundTripIsExact) {
  std::mt19937_64 rng(61);
  const Matrix m = oracle::gaussian(4, 3, rng) * 1e-7;
  std::istringstream in(io::format_matrix(m));
  EXPECT_EQ(io::read_matrix(in), m);
  const auto text = io::format_matrix(m);
  EXPECT_EQ(text.substr(0, 4), "4 3\n");
}

TEST(MatrixText, RejectsMalformedInput) {
  for (const char* bad : {"", "2", "2 2\n1 2 3", "1 2\n1 x", "1 1\n1 2", "1 1\nnan", "-1 2\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(io::read_matrix(in), ValidationError) << bad;
  }
}

TEST(MatrixText, FilesAndVectors) {
  const auto dir = scratch_dir();
  Vector v(3);
  v << 1.5, -2.0, 1e300;
  io::write_file_atomic(dir / "v.txt", io::format_vector(v));
  EXPECT_EQ(io::load_vector(dir / "v.txt"), v);
  io::write_file_atomic(dir / "row.txt", "1 3\n1 2 3\n");
  EXPECT_EQ(io::load_vector(dir / "row.txt").size(), 3);
  io::write_file_atomic(dir / "m.txt", "2 2\n1 2\n3 4\n");
  EXPECT_THROW(io::load_vector(dir / "m.txt"), ValidationError);
  EXPECT_THROW(io::load_matrix(dir / "missing.txt"), IoError);
  fs::remove_all(dir);
}

TEST(AtomicWrite, LeavesNoTemporaryAndFailsCleanly) {
  const auto dir = scratch_dir();
  io::write_file_atomic(dir / "a.txt", "hello");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "hello");
  io::write_file_atomic(dir / "a.txt", "bye");
  EXPECT_EQ(io::read_file(dir / "a.txt"), "bye");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);
  EXPECT_THROW(io::write_file_atomic(dir / "no" / "such" / "dir.txt", "x"), IoError);
  fs::remove_all(dir);
}

TEST(MaskFile, RoundTripAndValidation) {
  const auto inst = gen_matrix_completion(5, 6, 2, 0.5, 3);
  std::istringstream in(io::format_mask(inst.objective));
  const auto back = io::parse_mask(in);
  EXPECT_EQ(back.positions(), inst.objective.positions());
  EXPECT_EQ(back.observations(), inst.objective.observations());
  for (const char* bad : {"2 2 1\n0 1 1.0\n", "2 2 2\n1 1 1.0\n", "2 2 1\n1 1 1.0\n2 2 2.0\n", "2 2 2\n1 1 1\n1 1 2\n"}) {
    std::istringstream b(bad);
    EXPECT_THROW(io::parse_mask(b), ValidationError) << bad;
  }
}

TEST(GroupsFile, OneBasedRoundTrip) {
  const auto groups = io::parse_groups("[[1,2],[3,4,5]]");
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0], (std::vector<Index>{0, 1}));
  EXPECT_EQ(groups[1], (std::vector<Index>{2, 3, 4}));
  EXPECT_EQ(io::parse_groups(io::format_groups(groups)), groups);
  EXPECT_THROW(io::parse_groups("[[0,1]]"), ValidationError);
  EXPECT_THROW(io::parse_groups("{}"), ValidationError);
  EXPECT_THROW(io::parse_groups("[[1,"), ValidationError);
}

TEST(TraceCsv, RoundTripOfSolverTrace) {
  const auto inst = gen_iid_gaussian(60, 30, 3, 0.01, 4);
  const auto trace = acc_iht(inst.objective, inst.model, SolverConfig{}, inst.truth);
  const auto rows = report::trace_rows(trace);
  const auto text = report::format_trace_csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,f_value,step_norm,dist_to_truth,support");
  EXPECT_EQ(report::parse_trace_csv(text), rows);
}

TEST(TraceCsv, RandomRowsRoundTrip) {
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<report::TraceRow> rows;
    for (std::size_t i = 0; i < 10; ++i) {
      report::TraceRow r;
      r.iter = i;
      r.f_value = std::abs(u(rng)) * 1e-9;
      r.step_norm = std::abs(u(rng));
      if (coin(rng)) r.dist_to_truth = std::abs(u(rng)) / 7.0;
      for (Index j = 0; j < 5; ++j)
        if (coin(rng)) r.support.push_back(j * 3);
      rows.push_back(r);
    }
    EXPECT_EQ(report::parse_trace_csv(report::format_trace_csv(rows)), rows);
  }
  EXPECT_THROW(report::parse_trace_csv("bad header\n"), ValidationError);
  EXPECT_THROW(report::parse_trace_csv("iter,f_value,step_norm,dist_to_truth,support\n1,2\n"), ValidationError);
}

TEST(TraceCsv, LowRankSupportColumnIsEmpty) {
  const auto inst = gen_matrix_completion(8, 7, 1, 0.6, 5);
  SolverConfig cfg;
  cfg.max_iter = 3;
  const auto rows = report::trace_rows(acc_iht(inst.objective, inst.model, cfg));
  for (const auto& r : rows) EXPECT_TRUE(r.support.empty());
}

TEST(TraceJson, EchoesConfigAndTermination) {
  const auto inst = gen_toy(5);
  SolverConfig cfg;
  cfg.tau = 0.1;
  const auto trace = acc_iht(inst.objective, inst.model, cfg, inst.truth);
  const auto j = report::trace_json(trace, cfg, "acciht");
  EXPECT_EQ(j["config"]["tau"], 0.1);
  EXPECT_EQ(j["config"]["step_rule"], "auto");
  EXPECT_EQ(j["termination"], to_string(trace.termination));
  EXPECT_EQ(j["records"].size(), trace.records.size());
  EXPECT_EQ(j["records"][0]["iter"], 0);
}

TEST(Descriptor, RoundTrip) {
  const auto inst = gen_iid_gaussian(10, 5, 2, 0.25, 77);
  const auto j = report::descriptor_json(inst.descriptor);
  const auto back = report::parse_descriptor(j);
  EXPECT_EQ(back.generator, "iid");
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(j["params"]["sigma"], 0.25);
  EXPECT_THROW(report::parse_descriptor(nlohmann::json::object()), ValidationError);
}

TEST(MetricsJson, OnlyPresentFields) {
  MetricsReport m;
  m.relative_error = 0.5;
  const auto j = report::metrics_json(m);
  EXPECT_EQ(j.size(), 1u);
  EXPECT_EQ(j["relative_error"], 0.5);
}
