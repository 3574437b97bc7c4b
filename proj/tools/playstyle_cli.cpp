// playstyle: data generation, HSD training and playstyle-distance evaluation.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "playstyle/errors.hpp"
#include "playstyle/harness.hpp"

namespace fs = std::filesystem;
using namespace playstyle;

namespace {

struct MetricFlags {
  std::size_t t = 2;
  std::string aggregation = "expected";
  std::string distance = "w2";
  bool squared_mean = false;

  void add_to(CLI::App* cmd, bool many_thresholds = false) {
    if (!many_thresholds) cmd->add_option("--t", t, "visit threshold")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--aggregation", aggregation, "uniform | expected")
        ->capture_default_str()
        ->check(CLI::IsMember({"uniform", "expected"}));
    cmd->add_option("--distance", distance, "w1 | w2 | kl | mkl")
        ->capture_default_str()
        ->check(CLI::IsMember({"w1", "w2", "kl", "mkl"}));
    cmd->add_flag("--squared-mean", squared_mean, "square the Gaussian W2 mean term");
  }

  MetricConfig build(std::size_t threshold) const {
    MetricConfig m;
    m.threshold = threshold;
    m.aggregation = parse_aggregation(aggregation);
    m.distance = parse_distance_kind(distance);
    m.squared_mean = squared_mean;
    return m;
  }
};

std::string describe(const MetricConfig& m) {
  return "t=" + std::to_string(m.threshold) + " " + to_string(m.aggregation) + " " + to_string(m.distance) +
         (m.squared_mean ? " sq" : "");
}

// ---------------------------------------------------------------------------

struct GenData {
  std::vector<double> speeds = kDefaultSpeeds;
  std::string noise_levels = "1..5";
  std::size_t samples = 1024;
  std::uint64_t seed = 7;
  std::uint32_t episode_steps = SimConfig{}.episode_steps;
  std::string out;

  int run() const {
    if (samples == 0) throw ConfigError("--samples must be positive");
    SimConfig sim;
    sim.episode_steps = episode_steps;
    const auto grid = generate_style_grid(sim, speeds, parse_int_list(noise_levels), samples, seed);
    try {
      const auto rows = write_style_grid(grid, seed, out);
      for (const auto& r : rows) std::cout << r.id << '\t' << (fs::path(out) / r.path).string() << '\n';
      std::cout << "wrote " << rows.size() << " datasets and " << (fs::path(out) / kManifestName).string() << '\n';
    } catch (const fs::filesystem_error& e) {
      throw IoError("--out " + out + ": " + e.code().message());
    }
    return kExitOk;
  }
};

PlayDataset load_training_data(const std::vector<std::string>& paths) {
  PlayDataset all;
  bool first = true;
  auto absorb = [&](const PlayDataset& ds) {
    if (first) {
      all = PlayDataset("train", ds.action_space(), ds.obs_shape());
      first = false;
    }
    all.reserve(all.size() + ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) all.append_from(ds, i);
  };
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      for (const auto& d : load_manifest_dir(p)) absorb(d.data);
    } else {
      absorb(load_dataset(p));
    }
  }
  if (first || all.empty()) throw SizeError("--data: no samples");
  return all;
}

struct TrainHsd {
  std::vector<std::string> data;
  std::uint32_t k = 2;
  std::uint32_t b = 20;
  std::uint32_t latent_width = 0;
  std::uint32_t epochs = 8;
  std::uint32_t batch_size = 32;
  double learn_rate = 3e-4;
  double beta = 0.25;
  std::uint64_t seed = 1;
  std::uint32_t restart_window = HsdConfig{}.restart_window;
  std::string out;
  std::string loss_csv;

  int run() const {
    const auto ds = load_training_data(data);
    HsdConfig cfg;
    cfg.obs_shape = ds.obs_shape();
    cfg.action_space = ds.action_space();
    cfg.codebook = k;
    cfg.cells = b;
    // Closest multiple of B to 500 unless given.
    cfg.latent_width = latent_width ? latent_width : std::max<std::uint32_t>(b, (500 + b / 2) / b * b);
    cfg.epochs = epochs;
    cfg.batch_size = batch_size;
    cfg.learn_rate = learn_rate;
    cfg.beta = beta;
    cfg.seed = seed;
    cfg.restart_window = restart_window;
    cfg.validate();

    std::cout << "training on " << ds.size() << " samples, state space " << k << "^" << b << ", latent width "
              << cfg.latent_width << '\n';
    const auto result = train(init_model(cfg), ds, [](const LossRecord& r) {
      if (r.step % 100 == 0) {
        std::cout << "step " << r.step << " L_rec " << r.l_rec << " L_vq0 " << r.l_vq0 << " L_vq1 " << r.l_vq1
                  << " L_pi " << r.l_pi << '\n';
      }
    });
    save_model(result.model, out);
    const auto csv = loss_csv.empty() ? out + ".loss.csv" : loss_csv;
    write_loss_csv(result.curve, csv);
    std::cout << "wrote " << out << " and " << csv << " (" << result.curve.size() << " steps)\n";
    return kExitOk;
  }
};

struct Distance {
  bool golden = false;
  std::string a;
  std::string b;
  std::string mapper = "lrd";
  bool breakdown = false;
  MetricFlags metric;

  int run() const {
    const auto cfg = metric.build(metric.t);
    PlayDataset da;
    PlayDataset db;
    StateMapper m = StateMapper::pixel();
    if (golden) {
      std::tie(da, db) = golden_fixture();
    } else {
      if (a.empty() || b.empty()) throw ConfigError("distance needs --a and --b, or --golden-appendix-b");
      da = load_dataset(a);
      db = load_dataset(b);
      m = parse_mapper(mapper);
    }
    const auto ta = build_state_table(m, da);
    const auto tb = build_state_table(m, db);
    const auto r = playstyle_distance(ta, tb, cfg);
    std::cout << "mapper " << m.describe() << ", " << describe(cfg) << '\n';
    std::cout << "intersection " << r.intersection_size << '\n';
    if (breakdown || golden) {
      for (const auto& s : r.per_state) {
        std::cout << "  state";
        for (auto sym : s.state.code()) std::cout << ' ' << sym;
        std::cout << std::fixed << std::setprecision(3) << "  d=" << s.distance << "  wA=" << s.weight_a
                  << "  wB=" << s.weight_b << '\n';
      }
    }
    if (!r.defined()) {
      std::cout << "distance undefined\n";
      return kExitUndefined;
    }
    std::cout << "distance " << std::fixed << std::setprecision(6) << *r.value << '\n';
    return kExitOk;
  }
};

struct Accuracy {
  std::string candidates;
  std::vector<std::string> mappers{"lrd"};
  std::vector<std::string> models;
  std::vector<std::size_t> thresholds{2};
  std::size_t trials = 100;
  std::size_t target_samples = 0;
  std::uint64_t target_seed = 1000;
  int target_noise = -1;
  std::string targets;
  std::string resample_from;
  std::string csv;
  MetricFlags metric;

  int run() const {
    const auto cands = load_manifest_dir(candidates);
    if (cands.empty()) throw SizeError("--candidates: empty manifest");
    std::vector<const PlayDataset*> ptrs;
    std::vector<StyleSpec> styles;
    std::vector<std::string> ids;
    for (const auto& c : cands) {
      ptrs.push_back(&c.data);
      styles.push_back(c.entry.style);
      ids.push_back(c.entry.id);
    }

    Evaluation eval;
    std::vector<std::string> names;
    std::size_t first_model = 0;
    for (const auto& spec : mappers) {
      eval.mappers.push_back(parse_mapper(spec));
      names.push_back(spec);
    }
    first_model = eval.mappers.size();
    for (const auto& path : models) {
      eval.mappers.push_back(parse_mapper("hsd:" + path));
      names.push_back("hsd:" + fs::path(path).filename().string());
    }
    for (std::size_t t : thresholds) eval.metrics.push_back(metric.build(t));
    for (const auto& m : eval.mappers) eval.candidates.push_back(build_candidates(m, ptrs));

    std::vector<LoadedDataset> fixed;
    TargetSource source;
    std::size_t count = 0;
    if (!targets.empty() && !resample_from.empty()) throw ConfigError("--targets and --resample-from are exclusive");
    if (!resample_from.empty()) {
      // One pool per style; trial i draws a fresh subset of its style's pool.
      if (trials == 0) throw ConfigError("--trials must be positive");
      fixed = load_manifest_dir(resample_from);
      if (fixed.size() != ids.size()) throw ConfigError("--resample-from must hold one dataset per candidate");
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (fixed[k].entry.id != ids[k]) throw ConfigError("--resample-from: no pool for " + ids[k]);
      }
      const std::size_t n = target_samples ? target_samples : cands.front().data.size();
      const std::uint64_t seed = target_seed;
      source = [&fixed, n, seed](std::size_t i) {
        const auto& pool = fixed[i % fixed.size()];
        auto ds = sample_subset(pool.data, n, seed + i / fixed.size());
        ds.set_id(pool.entry.id);
        return ds;
      };
      count = trials * ids.size();
    } else if (!targets.empty()) {
      fixed = load_manifest_dir(targets);
      for (const auto& f : fixed) candidate_index(eval.candidates.front().view(), f.entry.id);
      source = [&fixed](std::size_t i) { return fixed[i].data; };
      count = fixed.size();
    } else {
      if (trials == 0) throw ConfigError("--trials must be positive");
      auto target_styles = styles;
      if (target_noise >= 0) {
        for (auto& s : target_styles) s = make_style(s.target_speed, target_noise);
      }
      const std::size_t n = target_samples ? target_samples : cands.front().data.size();
      source = fresh_targets(SimConfig{}, target_styles, ids, n, target_seed);
      count = trials * styles.size();
    }

    const auto outcomes = run_trials(eval, source, count);
    std::vector<ResultRow> rows;
    std::vector<ResultRow> detail;
    for (std::size_t k = 0; k < eval.metrics.size(); ++k) {
      std::vector<AccuracyResult> model_results;
      for (std::size_t m = 0; m < eval.mappers.size(); ++m) {
        const auto label = names[m] + " " + describe(eval.metrics[k]);
        const auto r = summarize(outcomes[m][k]);
        rows.push_back({label, "all", r});
        if (m >= first_model) model_results.push_back(r);
        for (auto& row : per_style_rows(label, ids, outcomes[m][k])) detail.push_back(std::move(row));
      }
      if (model_results.size() > 1) {
        rows.push_back({"hsd mean of " + std::to_string(model_results.size()) + " " + describe(eval.metrics[k]),
                        "all", mean_result(model_results)});
      }
    }
    print_result_table(rows, std::cout);
    if (!csv.empty()) {
      rows.insert(rows.end(), detail.begin(), detail.end());
      write_result_csv(rows, csv);
      std::cout << "wrote " << csv << '\n';
    }
    return kExitOk;
  }
};

struct CodebookUsage {
  std::string model;
  std::vector<std::string> data;
  int hierarchy = 1;

  int run() const {
    const auto m = load_model(model);
    const auto ds = load_training_data(data);
    std::cout << codebook_usage(m, ds, hierarchy) << '\n';
    return kExitOk;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Playstyle similarity: datasets, HSD discretization and distances"};
  app.set_config("--config", "", "key=value configuration file; command-line flags win");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "echo the resolved configuration before running");
  app.require_subcommand(1);

  GenData gen;
  auto* c_gen = app.add_subcommand("gen-data", "generate a styled-sim dataset grid");
  c_gen->add_option("--speeds", gen.speeds, "target speeds")->delimiter(',')->capture_default_str();
  c_gen->add_option("--noise-levels", gen.noise_levels, "noise levels, e.g. 1..5 or 0,2")->capture_default_str();
  c_gen->add_option("--samples", gen.samples, "samples per dataset")->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "base seed")->capture_default_str();
  c_gen->add_option("--episode-steps", gen.episode_steps, "steps per episode")->capture_default_str();
  c_gen->add_option("--out", gen.out, "output directory")->required();

  TrainHsd tr;
  auto* c_train = app.add_subcommand("train-hsd", "train an HSD model");
  c_train->add_option("--data", tr.data, "dataset directories (manifest) or .psty files")->required();
  c_train->add_option("--K", tr.k, "codebook size at the top hierarchy")->capture_default_str();
  c_train->add_option("--B", tr.b, "cells at the top hierarchy")->capture_default_str();
  c_train->add_option("--latent-width", tr.latent_width, "top latent units (default: multiple of B nearest 500)");
  c_train->add_option("--epochs", tr.epochs)->capture_default_str();
  c_train->add_option("--batch-size", tr.batch_size)->capture_default_str();
  c_train->add_option("--lr", tr.learn_rate, "Adam step size")->capture_default_str();
  c_train->add_option("--beta", tr.beta, "commitment weight")->capture_default_str();
  c_train->add_option("--seed", tr.seed)->capture_default_str();
  c_train->add_option("--restart-window", tr.restart_window, "re-seed codes idle this many steps (0: off)")
      ->capture_default_str();
  c_train->add_option("--out", tr.out, "model file")->required();
  c_train->add_option("--loss-csv", tr.loss_csv, "loss log (default: <out>.loss.csv)");

  Distance dist;
  auto* c_dist = app.add_subcommand("distance", "playstyle distance between two datasets");
  c_dist->add_flag("--golden-appendix-b", dist.golden, "run the built-in worked example");
  c_dist->add_option("--a", dist.a, "first dataset (.psty)");
  c_dist->add_option("--b", dist.b, "second dataset (.psty)");
  c_dist->add_option("--mapper", dist.mapper, "pixel | lrd[:HxW/div] | hsd:<model>[@h]")->capture_default_str();
  c_dist->add_flag("--breakdown", dist.breakdown, "print per-state distances");
  dist.metric.add_to(c_dist);

  Accuracy acc;
  auto* c_acc = app.add_subcommand("accuracy", "style prediction accuracy against a candidate grid");
  c_acc->add_option("--candidates", acc.candidates, "candidate dataset directory")->required();
  c_acc->add_option("--mapper", acc.mappers, "mapper specs (repeatable)")->capture_default_str();
  c_acc->add_option("--model", acc.models, "HSD model files; each adds an hsd mapper");
  c_acc->add_option("--t", acc.thresholds, "visit thresholds")->delimiter(',')->capture_default_str();
  c_acc->add_option("--trials", acc.trials, "fresh targets per style")->capture_default_str();
  c_acc->add_option("--target-samples", acc.target_samples, "samples per target (default: candidate size)");
  c_acc->add_option("--target-seed", acc.target_seed, "first target seed")->capture_default_str();
  c_acc->add_option("--target-noise-level", acc.target_noise, "override the targets' noise level");
  c_acc->add_option("--targets", acc.targets, "use datasets from this directory as targets");
  c_acc->add_option("--resample-from", acc.resample_from, "draw each trial's target as a subset of these datasets");
  c_acc->add_option("--csv", acc.csv, "write the result table here");
  acc.metric.add_to(c_acc, true);

  CodebookUsage usage;
  auto* c_usage = app.add_subcommand("codebook-usage", "distinct codes over a dataset");
  c_usage->add_option("--model", usage.model)->required();
  c_usage->add_option("--data", usage.data)->required();
  c_usage->add_option("--hierarchy", usage.hierarchy)->capture_default_str()->check(CLI::Range(0, 1));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (print_config) {
    for (const auto* sub : app.get_subcommands()) {
      std::cout << '[' << sub->get_name() << "]\n" << sub->config_to_str(true, false) << std::flush;
    }
  }

  try {
    if (*c_gen) return gen.run();
    if (*c_train) return tr.run();
    if (*c_dist) return dist.run();
    if (*c_acc) return acc.run();
    if (*c_usage) return usage.run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (const auto* t = dynamic_cast<const TrainingError*>(&e)) std::cerr << "diverged at step " << t->step() << '\n';
    return exit_code_for(e);
  }
  return kExitUsage;
}
