#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <sys/wait.h>

#include "playstyle/errors.hpp"
#include "playstyle/harness.hpp"

namespace playstyle {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(PLAYSTYLE_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

double value_after(const std::string& text, const std::string& key) {
  std::smatch m;
  const std::regex re(key + " ([0-9.eE+-]+)");
  if (!std::regex_search(text, m, re)) return std::nan("");
  return std::stod(m[1]);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("playstyle_harness_" + name)) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& leaf = {}) const { return (leaf.empty() ? path_ : path_ / leaf).string(); }

 private:
  fs::path path_;
};

TEST(IntList, Forms) {
  EXPECT_EQ(parse_int_list("1..5"), (std::vector<int>{1, 2, 3, 4, 5}));
  EXPECT_EQ(parse_int_list("0,3..5"), (std::vector<int>{0, 3, 4, 5}));
  EXPECT_EQ(parse_int_list(" 2 "), (std::vector<int>{2}));
  EXPECT_THROW(parse_int_list(""), ConfigError);
  EXPECT_THROW(parse_int_list("1,,2"), ConfigError);
  EXPECT_THROW(parse_int_list("5..1"), ConfigError);
  EXPECT_THROW(parse_int_list("a"), ConfigError);
  EXPECT_THROW(parse_int_list("1x"), ConfigError);
}

TEST(ExitCodes, Mapping) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), kExitUsage);
  EXPECT_EQ(exit_code_for(DomainError("x")), kExitUsage);
  EXPECT_EQ(exit_code_for(FormatError("x")), kExitData);
  EXPECT_EQ(exit_code_for(CorruptionError("x", 1)), kExitData);
  EXPECT_EQ(exit_code_for(IoError("x")), kExitData);
  EXPECT_EQ(exit_code_for(TrainingError("x", 3)), kExitDivergence);
}

TEST(Manifest, GridRoundTrip) {
  TempDir dir("manifest");
  const auto grid = generate_style_grid(SimConfig{}, {70, 60}, {0, 2}, 64, 5);
  const auto rows = write_style_grid(grid, 5, dir.path());
  ASSERT_EQ(rows.size(), 4u);
  const auto back = read_manifest(dir.path() / kManifestName);
  ASSERT_EQ(back.size(), 4u);
  EXPECT_EQ(back[0].id, "s60_n0");
  EXPECT_EQ(back[1].style.sigma_steer, 0.02);
  EXPECT_EQ(back[3].seed, 5u);
  const auto loaded = load_manifest_dir(dir.path());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(loaded[i].entry.id, grid[i].style.id());
    EXPECT_TRUE(loaded[i].data == grid[i].data);
    EXPECT_EQ(loaded[i].data.id(), grid[i].style.id());
  }
  std::ofstream(dir.path() / kManifestName, std::ios::app) << "s60_n0,s60_n0.psty,60,0,0,0,5\n";
  EXPECT_THROW(load_manifest_dir(dir.path()), FormatError);
  std::ofstream(dir.path() / kManifestName) << "id,path\n";
  EXPECT_THROW(read_manifest(dir.path() / kManifestName), FormatError);
  EXPECT_THROW(read_manifest(dir.path() / "nope.csv"), IoError);
}

TEST(Mappers, Specs) {
  EXPECT_EQ(parse_mapper("pixel").describe(), "pixel");
  EXPECT_EQ(parse_mapper("lrd").describe(), "lrd(8x8,/16)");
  EXPECT_EQ(parse_mapper("lrd:4x6/32").describe(), "lrd(4x6,/32)");
  EXPECT_THROW(parse_mapper("lrd:4x"), ConfigError);
  EXPECT_THROW(parse_mapper("lrd:4x4/2x"), ConfigError);
  EXPECT_THROW(parse_mapper("hsd:"), ConfigError);
  EXPECT_THROW(parse_mapper("hsd:m.hsdm@2"), ConfigError);
  EXPECT_THROW(parse_mapper("hsd:/no/such/model.hsdm"), IoError);
  EXPECT_THROW(parse_mapper("tsne"), ConfigError);
}

TEST(Trials, FreshTargetsAreLabelledAndDisjoint) {
  const std::vector<StyleSpec> styles{make_style(60, 1), make_style(80, 1)};
  const auto src = fresh_targets(SimConfig{}, styles, {"a", "b"}, 128, 1000);
  const auto t0 = src(0), t1 = src(1), t2 = src(2);
  EXPECT_EQ(t0.id(), "a");
  EXPECT_EQ(t1.id(), "b");
  EXPECT_EQ(t2.id(), "a");
  EXPECT_FALSE(t0 == t2);
  EXPECT_TRUE(t0 == src(0));
  EXPECT_TRUE(t0 == generate_style_dataset(SimConfig{}, styles[0], 128, 1000));
  EXPECT_THROW(fresh_targets(SimConfig{}, styles, {"a"}, 128, 1), ConfigError);
}

TEST(Trials, ParallelTrialsMatchDirectScoring) {
  const auto grid = generate_style_grid(SimConfig{}, {60, 70, 80}, {0}, 256, 7);
  std::vector<const PlayDataset*> ptrs;
  std::vector<StyleSpec> styles;
  std::vector<std::string> ids;
  for (const auto& g : grid) {
    ptrs.push_back(&g.data);
    styles.push_back(g.style);
    ids.push_back(g.style.id());
  }
  Evaluation eval;
  eval.mappers = {StateMapper::lrd(), StateMapper::pixel()};
  for (const auto& m : eval.mappers) eval.candidates.push_back(build_candidates(m, ptrs));
  MetricConfig m1, m2;
  m1.threshold = 1;
  eval.metrics = {m1, m2};
  const auto source = fresh_targets(SimConfig{}, styles, ids, 256, 1000);
  const auto out = run_trials(eval, source, 9);
  ASSERT_EQ(out.size(), 2u);
  ASSERT_EQ(out[0].size(), 2u);
  ASSERT_EQ(out[0][0].size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    const auto target = source(i);
    for (std::size_t m = 0; m < 2; ++m) {
      const auto table = build_state_table(eval.mappers[m], target);
      const auto view = eval.candidates[m].view();
      for (std::size_t k = 0; k < 2; ++k) {
        const auto want = score_trial(table, i % 3, view, eval.metrics[k]);
        EXPECT_EQ(out[m][k][i].predicted, want.predicted);
        EXPECT_EQ(out[m][k][i].truth, i % 3);
        EXPECT_EQ(out[m][k][i].true_intersection, want.true_intersection);
        EXPECT_EQ(out[m][k][i].undefined, want.undefined);
      }
    }
  }
  // A target whose id has no candidate surfaces as a ConfigError.
  const TargetSource stray = [](std::size_t) {
    auto d = generate_style_dataset(SimConfig{}, make_style(65, 0), 32, 3);
    d.set_id("s65_n0");
    return d;
  };
  EXPECT_THROW(run_trials(eval, stray, 4), ConfigError);
  EXPECT_THROW(run_trials(eval, source, 0), EvaluationError);
}

TEST(Results, PerStyleMeanAndCsv) {
  std::vector<TrialOutcome> o{{0, 0, 5, 0, 2}, {1, 1, 3, 0, 2}, {0, 1, 1, 1, 2}, {std::nullopt, 0, 0, 2, 2}};
  const auto rows = per_style_rows("cfg", {"b", "a"}, o);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].style, "a");
  EXPECT_EQ(rows[0].result.percent, 50.0);
  EXPECT_EQ(rows[1].style, "b");
  EXPECT_EQ(rows[1].result.no_prediction, 1u);

  const std::vector<AccuracyResult> rs{{80, 8, 10, 0, 2, 0.1}, {60, 6, 10, 1, 4, 0.3}};
  const auto mean = mean_result(rs);
  EXPECT_EQ(mean.percent, 70);
  EXPECT_EQ(mean.correct, 14u);
  EXPECT_EQ(mean.total, 20u);
  EXPECT_NEAR(mean.mean_intersection, 3, 1e-12);
  EXPECT_NEAR(mean.undefined_rate, 0.2, 1e-12);
  EXPECT_THROW(mean_result({}), EvaluationError);

  TempDir dir("csv");
  write_result_csv({{"lrd t=2", "all", mean}}, dir.path() / "r.csv");
  EXPECT_EQ(slurp(dir.path() / "r.csv"),
            "configuration,style,accuracy,correct,total,no_prediction,mean_intersection,undefined_rate\n"
            "lrd t=2,all,70,14,20,1,3,0.2\n");
  std::ostringstream table;
  print_result_table({{"lrd t=2", "all", mean}}, table);
  EXPECT_NE(table.str().find("70.00%"), std::string::npos);
}

TEST(Cli, GoldenDistances) {
  auto r = cli("distance --golden-appendix-b --t 1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(value_after(r.out, "distance"), 0.940, 1e-3);
  r = cli("distance --golden-appendix-b --t 2");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(value_after(r.out, "distance"), 1.225, 1e-3);
  r = cli("distance --golden-appendix-b --t 1 --aggregation uniform");
  EXPECT_NEAR(value_after(r.out, "distance"), 0.880, 1e-3);
  r = cli("distance --golden-appendix-b --t 3");
  EXPECT_EQ(r.code, kExitUndefined);
  EXPECT_NE(r.out.find("undefined"), std::string::npos);
}

TEST(Cli, UsageAndDataErrors) {
  EXPECT_EQ(cli("").code, kExitUsage);
  EXPECT_EQ(cli("nonsense").code, kExitUsage);
  EXPECT_EQ(cli("gen-data --samples 0 --out /tmp/playstyle_never").code, kExitUsage);
  EXPECT_FALSE(fs::exists("/tmp/playstyle_never"));
  EXPECT_EQ(cli("distance --a /no/such.psty --b /no/such.psty").code, kExitData);
  EXPECT_EQ(cli("distance --golden-appendix-b --aggregation mean").code, kExitUsage);
  EXPECT_EQ(cli("distance --golden-appendix-b --t 0").code, kExitUsage);
  EXPECT_EQ(cli("distance").code, kExitUsage);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, EndToEnd) {
  TempDir dir("e2e");
  auto r = cli("gen-data --speeds 60,70 --noise-levels 0..1 --samples 256 --seed 7 --out " + dir.str("d"));
  ASSERT_EQ(r.code, 0) << r.out;
  ASSERT_TRUE(fs::exists(dir.path() / "d" / kManifestName));
  EXPECT_EQ(load_manifest_dir(dir.path() / "d").size(), 4u);
  const auto first = slurp(dir.path() / "d" / "s60_n1.psty");
  r = cli("gen-data --speeds 60,70 --noise-levels 0..1 --samples 256 --seed 7 --out " + dir.str("d"));
  EXPECT_EQ(slurp(dir.path() / "d" / "s60_n1.psty"), first);

  const auto a = dir.str("d/s60_n1.psty");
  r = cli("distance --mapper lrd --t 1 --a " + a + " --b " + a);
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(value_after(r.out, "distance"), 0.0);
  r = cli("distance --mapper lrd --t 1 --breakdown --a " + a + " --b " + dir.str("d/s70_n1.psty"));
  EXPECT_TRUE(r.code == 0 || r.code == kExitUndefined) << r.out;

  r = cli("train-hsd --data " + dir.str("d") + " --epochs 0 --seed 1 --out " + dir.str("m0.hsdm"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto m0 = load_model(dir.path() / "m0.hsdm");
  EXPECT_TRUE(m0 == init_model(m0.config()));
  EXPECT_EQ(m0.config().cells, 20u);
  EXPECT_EQ(m0.config().codebook, 2u);
  EXPECT_EQ(m0.config().latent_width, 500u);
  EXPECT_EQ(slurp(dir.path() / "m0.hsdm.loss.csv"), "step,L_rec,L_vq0,L_vq1,L_pi\n");

  r = cli("train-hsd --data " + dir.str("d") + " --epochs 1 --batch-size 64 --seed 1 --B 8 --out " + dir.str("m1.hsdm") +
          " --loss-csv " + dir.str("l1.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  r = cli("train-hsd --data " + dir.str("d") + " --epochs 1 --batch-size 64 --seed 2 --B 8 --out " + dir.str("m2.hsdm"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(dir.path() / "m1.hsdm"), slurp(dir.path() / "m2.hsdm"));
  EXPECT_EQ(load_model(dir.path() / "m1.hsdm").config().latent_width, 504u);
  EXPECT_NE(slurp(dir.path() / "l1.csv").find("step,L_rec"), std::string::npos);

  r = cli("codebook-usage --model " + dir.str("m1.hsdm") + " --data " + dir.str("d"));
  ASSERT_EQ(r.code, 0) << r.out;
  const int usage = std::stoi(r.out);
  EXPECT_GE(usage, 1);
  EXPECT_LE(usage, 1024);

  // Candidates used verbatim as their own targets.
  r = cli("accuracy --candidates " + dir.str("d") + " --targets " + dir.str("d") + " --mapper lrd --mapper pixel --t 1 --model " +
          dir.str("m1.hsdm") + " --model " + dir.str("m2.hsdm") + " --csv " + dir.str("acc.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  const auto csv = slurp(dir.path() / "acc.csv");
  EXPECT_NE(csv.find("lrd t=1 expected w2,all,100,4,4,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("pixel t=1 expected w2,all,100,4,4,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("hsd mean of 2 t=1 expected w2,all,100,8,8,"), std::string::npos) << csv;
  EXPECT_NE(csv.find("lrd t=1 expected w2,s60_n0,100,1,1,"), std::string::npos) << csv;

  // Fresh targets: pixel never intersects.
  r = cli("accuracy --candidates " + dir.str("d") + " --mapper pixel --trials 2 --target-samples 128 --csv " +
          dir.str("fresh.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(dir.path() / "fresh.csv").find("pixel t=2 expected w2,all,0,0,8,8,0,1"), std::string::npos);

  // Key=value config with a subcommand section; the command line wins.
  std::ofstream(dir.path() / "cfg.ini") << "[distance]\ngolden-appendix-b=true\nt=1\n";
  r = cli("--config " + dir.str("cfg.ini") + " distance");
  EXPECT_NEAR(value_after(r.out, "distance"), 0.940, 1e-3);
  r = cli("--config " + dir.str("cfg.ini") + " distance --t 2");
  EXPECT_NEAR(value_after(r.out, "distance"), 1.225, 1e-3);
  r = cli("--print-config distance --golden-appendix-b --t 2");
  EXPECT_NE(r.out.find("[distance]"), std::string::npos);
  EXPECT_NE(r.out.find("t=2"), std::string::npos);
  EXPECT_NE(r.out.find("aggregation=\"expected\""), std::string::npos);

  // A target id missing from the candidates is a usage error.
  fs::create_directories(dir.path() / "other");
  const auto other = generate_style_grid(SimConfig{}, {90}, {0}, 64, 3);
  write_style_grid(other, 3, dir.path() / "other");
  r = cli("accuracy --candidates " + dir.str("d") + " --targets " + dir.str("other"));
  EXPECT_EQ(r.code, kExitUsage) << r.out;
}

}  // namespace
}  // namespace playstyle
