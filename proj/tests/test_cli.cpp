#include "minimaxdl/cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace minimaxdl;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "minimaxdl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("minimaxdl_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path path = dir / name;
  write_json(path, j);
  return path;
}

json sweep_config() {
  return json{{"m", 20}, {"p", 20}, {"s", 2}, {"nonzero_law", "rademacher"}, {"sigma", 0.1}, {"r", 0.05},
              {"learners", {"algorithm1"}}, {"N", {100, 400}}, {"trials", 20}, {"seed", 5}};
}

}  // namespace

TEST(Cli, BoundsEvalWritesReport) {
  const fs::path dir = scratch("eval");
  const auto cfg = write_config(dir, "thm1.json",
                                {{"bound", "thm1"}, {"m", 6}, {"p", 10}, {"N", 100}, {"sigma2", 1.0},
                                 {"sigma_x_norm", 1.0}, {"r", 2 * std::sqrt(10.0)}});
  const Outcome o = invoke({"bounds", "eval", "--config", cfg.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = json::parse(o.out);
  EXPECT_NEAR(j.at("value").get<double>(), 1.25e-4, 1e-16);
  EXPECT_EQ(j.at("bound_id"), "thm1");
}

TEST(Cli, BoundsEvalCsvHasHeaderAndOneRow) {
  const fs::path dir = scratch("eval_csv");
  const auto cfg = write_config(dir, "ccrb.json", {{"bound", "ccrb"}, {"m", 2}, {"snr", 1.0}, {"N", 1}});
  const Outcome o = invoke({"bounds", "eval", "--config", cfg.string(), "--csv"});
  ASSERT_EQ(o.code, 0);
  EXPECT_EQ(o.out.rfind("bound_id,value,", 0), 0u);
  EXPECT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 2);
}

TEST(Cli, MissingFieldNamedWithExitTwo) {
  const fs::path dir = scratch("missing");
  const auto cfg = write_config(dir, "bad.json", {{"bound", "cor1"}, {"m", 6}, {"p", 10}, {"N", 100}, {"r", 1.0}});
  const Outcome o = invoke({"bounds", "eval", "--config", cfg.string()});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("'snr'"), std::string::npos) << o.err;
}

TEST(Cli, PreconditionViolationIsConfigError) {
  const fs::path dir = scratch("precondition");
  const auto cfg = write_config(dir, "thm2.json",
                                {{"bound", "thm2"}, {"m", 6}, {"p", 10}, {"s", 2}, {"N", 100}, {"snr", 0.02}, {"r", 1.0}});
  const Outcome o = invoke({"bounds", "eval", "--config", cfg.string()});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("SNR <= m/(18 sqrt(80) s)"), std::string::npos);
}

TEST(Cli, UnknownSubcommandPrintsUsage) {
  const Outcome o = invoke({"frobnicate"});
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("Usage"), std::string::npos);
  EXPECT_EQ(invoke({"bounds", "nope"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
}

TEST(Cli, MissingConfigFileIsConfigError) {
  EXPECT_EQ(invoke({"bounds", "eval", "--config", "/nonexistent/x.json"}).code, 2);
}

TEST(Cli, HelpDocumentsSweepColumns) {
  const Outcome o = invoke({"simulate", "mse", "--help"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("N, learner, mse_mean, mse_stderr, thm3_upper, cor1_lower, thm2_lower"), std::string::npos);
}

TEST(Cli, SampleSize) {
  const fs::path dir = scratch("sample_size");
  const auto cfg = write_config(dir, "n.json",
                                {{"bound", "cor1"}, {"target_eps", 4.1667e-4}, {"m", 6}, {"p", 10}, {"snr", 1.0},
                                 {"r", 2 * std::sqrt(10.0)}, {"rip_ok", true}});
  const Outcome o = invoke({"bounds", "sample-size", "--config", cfg.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(json::parse(o.out).at("N"), 100);
}

TEST(Cli, EnsembleBuildThenVerify) {
  const fs::path dir = scratch("ensemble");
  const auto cfg = write_config(dir, "ens.json", {{"m", 6}, {"p", 10}, {"epsilon", 1.0 / 320}, {"L", 16}, {"seed", 3}});
  const Outcome built = invoke({"ensemble", "build", "--config", cfg.string(), "--out", (dir / "ens").string()});
  ASSERT_EQ(built.code, 0) << built.err;
  const Outcome ok = invoke({"ensemble", "verify", "--dir", (dir / "ens").string()});
  EXPECT_EQ(ok.code, 0);
  EXPECT_TRUE(json::parse(ok.out).at("pass").get<bool>());

  // Rescale one column of one member on disk.
  Matrix M = read_matrix_csv(dir / "ens" / "member_0003.csv");
  M.col(2) *= 1.01;
  write_matrix_csv(dir / "ens" / "member_0003.csv", M);
  const Outcome bad = invoke({"ensemble", "verify", "--dir", (dir / "ens").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_FALSE(json::parse(bad.out).at("pass").get<bool>());
}

TEST(Cli, PackingAndRip) {
  const fs::path dir = scratch("packing");
  const auto pc = write_config(dir, "p.json", {{"d", 50}, {"P", 200}});
  const Outcome p = invoke({"packing", "build", "--config", pc.string(), "--seed", "9"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_GE(json::parse(p.out).at("min_hamming").get<int>(), 5);
  const auto bad = write_config(dir, "q.json", {{"d", 50}, {"P", 1000000000}});
  EXPECT_EQ(invoke({"packing", "build", "--config", bad.string()}).code, 2);

  Matrix D(2, 3);
  D << 1, 0, 1 / std::sqrt(2.0), 0, 1, 1 / std::sqrt(2.0);
  write_matrix_csv(dir / "D.csv", D);
  const auto rc = write_config(dir, "r.json", {{"dictionary", {{"csv", (dir / "D.csv").string()}}}, {"s", 2}});
  const Outcome r = invoke({"rip", "estimate", "--config", rc.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(json::parse(r.out).at("delta").get<double>(), 1 / std::sqrt(2.0), 1e-12);
}

TEST(Cli, SweepProductAndBoundColumns) {
  const auto rows = cli::run_sweep(cli::parse_sweep_config(cli::Config(sweep_config()), std::nullopt));
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& row : rows) {
    EXPECT_EQ(row.at("status"), "ok");
    EXPECT_EQ(row.at("master_seed"), "5");
    EXPECT_EQ(row.at("version"), kVersion);
    EXPECT_TRUE(row.at("thm2_lower").empty());  // Rademacher nonzeros
    const double mse = std::stod(row.at("mse_mean"));
    EXPECT_LE(std::stod(row.at("cor1_lower")), mse);
    EXPECT_LE(mse, std::stod(row.at("thm3_upper")));
  }
  EXPECT_EQ(rows[0].at("N"), "100");
  EXPECT_EQ(rows[1].at("N"), "400");
}

TEST(Cli, SweepIsByteIdenticalAcrossRunsAndThreads) {
  const fs::path dir = scratch("sweep");
  const auto cfg = write_config(dir, "mse.json", sweep_config());
  ASSERT_EQ(invoke({"simulate", "mse", "--config", cfg.string(), "--out", (dir / "a.csv").string()}).code, 0);
  ASSERT_EQ(invoke({"simulate", "mse", "--config", cfg.string(), "--out", (dir / "b.csv").string(), "--threads", "3",
                    "--gnuplot"})
                .code,
            0);
  EXPECT_EQ(read_text(dir / "a.csv"), read_text(dir / "b.csv"));
  EXPECT_TRUE(fs::exists(dir / "b.csv.gp"));
  EXPECT_NE(read_text(dir / "a.csv"),
            [&] {
              invoke({"simulate", "mse", "--config", cfg.string(), "--out", (dir / "c.csv").string(), "--seed", "6"});
              return read_text(dir / "c.csv");
            }());
}

TEST(Cli, FailingPointIsRecordedInRow) {
  // With s = 1 and N = p, the coefficient Gram matrix is almost surely singular.
  json cfg{{"m", 20}, {"p", 20}, {"s", 1}, {"sigma2", 0.01}, {"learners", {"oracle_ls"}}, {"N", {20, 2000}},
           {"trials", 3}, {"seed", 1}};
  const auto rows = cli::run_sweep(cli::parse_sweep_config(cli::Config(cfg), std::nullopt));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].at("status").rfind("error:", 0), 0u);
  EXPECT_TRUE(rows[0].at("mse_mean").empty());
  EXPECT_EQ(rows[1].at("status"), "ok");
}

TEST(Cli, SweepValidationIsTotal) {
  json cfg = sweep_config();
  cfg["p"] = 25;  // algorithm1 needs m = p
  EXPECT_THROW(cli::parse_sweep_config(cli::Config(cfg), std::nullopt), Error);
  cfg = sweep_config();
  cfg["trials"] = 1;
  EXPECT_THROW(cli::parse_sweep_config(cli::Config(cfg), std::nullopt), Error);
  cfg = sweep_config();
  cfg["learners"] = {"oracle_ls"};
  cfg["N"] = {10};
  EXPECT_THROW(cli::parse_sweep_config(cli::Config(cfg), std::nullopt), Error);
  cfg = sweep_config();
  cfg.erase("sigma");
  try {
    cli::parse_sweep_config(cli::Config(cfg), std::nullopt);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.condition(), "sigma2");
  }
}

TEST(Cli, SnrAxisMultipliesPoints) {
  json cfg = sweep_config();
  cfg.erase("sigma");
  cfg["snr"] = {1.0, 10.0, 100.0};
  cfg["learners"] = {"algorithm1", "oracle_ls"};
  const auto sc = cli::parse_sweep_config(cli::Config(cfg), std::nullopt);
  EXPECT_EQ(sc.noise_variances.size(), 3u);
  EXPECT_NEAR(sc.noise_variances[1], 0.01, 1e-15);
  const auto rows = cli::run_sweep(sc);
  EXPECT_EQ(rows.size(), 12u);
  EXPECT_NEAR(std::stod(rows[11].at("snr")), 100.0, 1e-9);
}

TEST(Cli, SimulateFanoReport) {
  const fs::path dir = scratch("fano");
  const auto cfg = write_config(dir, "fano.json",
                                {{"m", 6}, {"p", 10}, {"s", 2}, {"sigma2", 1.0}, {"epsilon", 1.0 / 320}, {"L", 64},
                                 {"N", 100}, {"trials", 300}, {"estimator", "oracle"}, {"seed", 4}});
  const Outcome o = invoke({"simulate", "fano", "--config", cfg.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  const json j = json::parse(o.out);
  for (const char* key : {"L", "eta", "mi_upper", "fano_floor", "p_e_hat", "stderr", "params"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j.at("p_e_hat"), 0.0);
}

TEST(Cli, ThreadsFromEnvironment) {
  ::setenv("MINIMAXDL_THREADS", "3", 1);
  EXPECT_EQ(cli::effective_threads(0), 3u);
  EXPECT_EQ(cli::effective_threads(2), 2u);
  ::setenv("MINIMAXDL_THREADS", "junk", 1);
  EXPECT_EQ(cli::effective_threads(0), 1u);
  ::unsetenv("MINIMAXDL_THREADS");
}
