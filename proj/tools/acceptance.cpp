// Acceptance run: one PASS/FAIL line per criterion, progress on stderr.
// Exit status is 0 only when every criterion passes.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "playstyle/action_dist.hpp"
#include "playstyle/harness.hpp"

namespace fs = std::filesystem;
using namespace playstyle;

namespace {

using Clock = std::chrono::steady_clock;

struct Options {
  std::size_t trials = 100;
  std::size_t samples = 1024;
  std::size_t info_trials = 20;
  std::uint32_t epochs = 8;
  std::string work;
};

int failures = 0;

void report(int id, bool pass, const std::string& what) {
  if (!pass) ++failures;
  std::cout << (pass ? "PASS" : "FAIL") << " [" << id << "] " << what << std::endl;
}

std::string fmt(double v, int prec = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(prec) << v;
  return s.str();
}

MetricConfig metric(std::size_t t, Aggregation agg = Aggregation::kExpected, DistanceKind d = DistanceKind::kW2) {
  MetricConfig m;
  m.threshold = t;
  m.aggregation = agg;
  m.distance = d;
  return m;
}

double elapsed(Clock::time_point since) { return std::chrono::duration<double>(Clock::now() - since).count(); }

// ---------------------------------------------------------------------------

void golden() {
  const auto [a, b] = golden_fixture();
  const auto ta = build_state_table(StateMapper::pixel(), a);
  const auto tb = build_state_table(StateMapper::pixel(), b);
  const auto r1 = playstyle_distance(ta, tb, metric(1));
  const auto r2 = playstyle_distance(ta, tb, metric(2));
  std::multiset<double> per_state;
  for (const auto& s : r1.per_state) per_state.insert(std::round(s.distance * 1000) / 1000);
  const bool ok = r1.defined() && r2.defined() && std::abs(*r1.value - 0.940) <= 1e-3 &&
                  std::abs(*r2.value - 1.225) <= 1e-3 && per_state == std::multiset<double>{0.707, 0.707, 1.225};
  report(1, ok,
         "golden fixture: d(t=1)=" + fmt(r1.value.value_or(NAN)) + " (0.940) d(t=2)=" + fmt(r2.value.value_or(NAN)) +
             " (1.225) per-state " + fmt(*per_state.begin()) + "/" + fmt(*std::next(per_state.begin())) + "/" +
             fmt(*per_state.rbegin()));

  const auto u = playstyle_distance(ta, tb, metric(1, Aggregation::kUniform));
  report(2, u.defined() && std::abs(*u.value - 0.880) <= 1e-3,
         "uniform aggregation: d(t=1)=" + fmt(u.value.value_or(NAN)) + " (0.880)");
}

void distribution_suite() {
  auto g1 = [](double m, double v) {
    return GaussianDist{Eigen::VectorXd::Constant(1, m), Eigen::MatrixXd::Constant(1, 1, v)};
  };
  const double w2c = w2_categorical({{1, 0, 0}}, {{0, 0.5, 0.5}});
  const double shift = w2_gaussian(g1(0, 1), g1(1, 1));
  const double scale = w2_gaussian(g1(0, 1), g1(0, 4));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const int dim = 1 + i % 8;
    const int rank = 1 + static_cast<int>(rng() % static_cast<unsigned>(dim));
    Eigen::MatrixXd a(dim, rank);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < rank; ++c) a(r, c) = g(rng);
    Eigen::MatrixXd m = a * a.transpose();
    m = 0.5 * (m + m.transpose());
    const auto s = psd_sqrt(m);
    worst = std::max(worst, (s * s - m).norm() / m.norm());
  }
  const bool ok = std::abs(w2c - 1.2247) < 1e-4 && std::abs(shift - 1) < 1e-9 && std::abs(scale - 1) < 1e-9 &&
                  worst <= 1e-8;
  report(3, ok,
         "distribution distances: w2_cat=" + fmt(w2c, 4) + " N(0,1)/N(1,1)=" + fmt(shift) + " N(0,1)/N(0,4)=" +
             fmt(scale) + " psd_sqrt worst rel err over 1000 matrices=" + [&] {
               std::ostringstream s;
               s << std::scientific << std::setprecision(2) << worst;
               return s.str();
             }());
}

PlayDataset random_table_data(std::mt19937_64& rng, std::size_t n, int states, std::uint32_t actions) {
  PlayDataset ds("r", ActionSpace::discrete(actions), {1, 1});
  for (std::size_t i = 0; i < n; ++i) {
    ds.add(std::vector<std::uint8_t>{static_cast<std::uint8_t>(rng() % static_cast<unsigned>(states))},
           static_cast<std::uint32_t>(rng() % actions));
  }
  return ds;
}

void metric_axioms() {
  std::mt19937_64 rng(4);
  std::size_t pairs = 0, violations = 0, triangles = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int states = 1 + trial % 10;
    const std::uint32_t actions = 2 + trial % 3;
    const auto a = build_state_table(StateMapper::pixel(), random_table_data(rng, 1 + trial % 50, states, actions));
    const auto b = build_state_table(StateMapper::pixel(), random_table_data(rng, 1 + trial % 37, states, actions));
    const auto c = build_state_table(StateMapper::pixel(), random_table_data(rng, 1 + trial % 23, states, actions));
    ++pairs;
    for (auto agg : {Aggregation::kUniform, Aggregation::kExpected}) {
      for (auto kind : {DistanceKind::kW1, DistanceKind::kW2}) {
        const auto cfg = metric(2, agg, kind);
        const auto ab = playstyle_distance(a, b, cfg), ba = playstyle_distance(b, a, cfg);
        if (ab.defined() != ba.defined() || (ab.defined() && std::abs(*ab.value - *ba.value) > 1e-12)) ++violations;
        const auto aa = playstyle_distance(a, a, cfg);
        if (aa.defined() && std::abs(*aa.value) > 1e-12) ++violations;
      }
    }
    const auto n1 = intersect_states(a, b, 1).size(), n2 = intersect_states(a, b, 2).size(),
               n4 = intersect_states(a, b, 4).size();
    if (!(n4 <= n2 && n2 <= n1)) ++violations;
    for (const auto& s : intersect_states(a, b, 1)) {
      if (!c.find(s)) continue;
      for (auto kind : {DistanceKind::kW1, DistanceKind::kW2}) {
        const auto cfg = metric(1, Aggregation::kUniform, kind);
        ++triangles;
        if (policy_distance(a, c, s, cfg) > policy_distance(a, b, s, cfg) + policy_distance(b, c, s, cfg) + 1e-12) {
          ++violations;
        }
      }
    }
  }
  report(4, violations == 0 && pairs >= 1000,
         "metric axioms: " + std::to_string(pairs) + " random table pairs, " + std::to_string(triangles) +
             " triangle checks, " + std::to_string(violations) + " violations");
}

// ---------------------------------------------------------------------------

struct GradCheck {
  HsdConfig cfg;
  HsdParams<double> params;
  PlayDataset ds;
  std::vector<std::size_t> batch;
  double alpha = 0.37;
  FrozenAssignments frozen;
  double worst = 0;
  std::size_t checked = 0;

  double loss(const HsdParams<double>& p, int which) const {
    const auto t = hsd_engine::forward<double>(cfg, p, ds, batch, alpha, false, 0, &frozen);
    switch (which) {
      case 0: return t.l_rec;
      case 1: return t.l_pi;
      case 2: return t.l_rec + t.l_pi;
      case 3: return t.l_vq0;
      default: return t.l_vq1;
    }
  }

  // Compares `analytic` (scaled by 1/scale) against central differences.
  void compare(const HsdParams<double>& analytic, Component comp, int which, double scale = 1.0) {
    auto p = params;
    std::vector<std::span<double>> mine;
    std::vector<std::span<const double>> theirs;
    p.for_each([&](const std::string&, Component c, const std::vector<std::uint32_t>&, std::span<double> t) {
      if (c == comp) mine.push_back(t);
    });
    analytic.for_each([&](const std::string&, Component c, const std::vector<std::uint32_t>&, std::span<const double> t) {
      if (c == comp) theirs.push_back(t);
    });
    const double h = 1e-6;
    for (std::size_t k = 0; k < mine.size(); ++k) {
      for (std::size_t i = 0; i < mine[k].size(); ++i) {
        const double saved = mine[k][i];
        mine[k][i] = saved + h;
        const double up = loss(p, which);
        mine[k][i] = saved - h;
        const double down = loss(p, which);
        mine[k][i] = saved;
        const double fd = scale * (up - down) / (2 * h);
        const double an = theirs[k][i];
        const double denom = std::max(std::abs(fd), std::abs(an));
        if (denom > 1e-9) worst = std::max(worst, std::abs(fd - an) / denom);
        ++checked;
      }
    }
  }
};

void gradient_check() {
  GradCheck g;
  auto& c = g.cfg;
  c.obs_shape = {2, 8, 8};
  c.action_space = ActionSpace::continuous(2);
  c.enc0_hidden = 6;
  c.cell_dim0 = 3;
  c.codebook0 = 5;
  c.fc_hidden = 7;
  c.latent_width = 12;
  c.cells = 4;
  c.codebook = 3;
  c.dec_hidden = 6;
  c.rec_hidden = 5;
  c.policy_hidden = 4;

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 0.5);
  g.ds = PlayDataset("g", c.action_space, c.obs_shape);
  std::vector<std::uint8_t> obs(shape_volume(c.obs_shape));
  for (int i = 0; i < 16; ++i) {
    for (auto& b : obs) b = static_cast<std::uint8_t>(rng() % 256);
    g.ds.add(obs, std::vector<float>{static_cast<float>(n(rng)), static_cast<float>(n(rng))});
    g.batch.push_back(static_cast<std::size_t>(i));
  }
  g.params = hsd_engine::init_params<double>(c);
  for (auto& v : g.params.embed0.rows) v = n(rng);
  for (auto& v : g.params.embed1.rows) v = n(rng);
  for (auto& v : g.params.enc0_out.b) v = n(rng);

  const auto trace = hsd_engine::forward<double>(c, g.params, g.ds, g.batch, g.alpha, false, 0);
  g.frozen = {trace.codes0, trace.codes1};
  const auto grads = hsd_engine::backward<double>(c, g.params, trace, g.batch);
  g.compare(grads, Component::kRec, 0);
  g.compare(grads, Component::kPolicy, 1);
  g.compare(grads, Component::kDec1, 2);
  g.compare(grads, Component::kEmbed0, 3);
  g.compare(grads, Component::kEmbed1, 4);
  const double component_worst = g.worst;

  // Encoder: the beta-dependent part equals beta times the L_vq gradient.
  auto at_beta = [&](double beta) {
    auto cb = c;
    cb.beta = beta;
    return hsd_engine::backward<double>(cb, g.params, trace, g.batch);
  };
  const auto g0 = at_beta(0.0), gb = at_beta(0.25);
  auto diff = gb;
  auto sub = [](HsdParams<double>& a, const HsdParams<double>& b) {
    std::vector<std::span<const double>> bs;
    b.for_each([&](const std::string&, Component, const std::vector<std::uint32_t>&, std::span<const double> t) {
      bs.push_back(t);
    });
    std::size_t k = 0;
    a.for_each([&](const std::string&, Component, const std::vector<std::uint32_t>&, std::span<double> t) {
      for (std::size_t i = 0; i < t.size(); ++i) t[i] -= bs[k][i];
      ++k;
    });
  };
  sub(diff, g0);
  g.worst = 0;
  g.compare(diff, Component::kEnc1, 4, 0.25);
  g.compare(diff, Component::kEnc0, 3, 0.25);
  const double beta_worst = g.worst;

  report(5, component_worst <= 1e-3 && beta_worst <= 1e-3,
         "HSD gradients: " + std::to_string(g.checked) + " parameters, worst relative error rec/pi/dec1/embed " +
             [&] {
               std::ostringstream s;
               s << std::scientific << std::setprecision(2) << component_worst << ", encoder beta term " << beta_worst;
               return s.str();
             }());
}

// ---------------------------------------------------------------------------

struct Grid {
  std::vector<GridDataset> data;
  std::vector<const PlayDataset*> ptrs;
  std::vector<StyleSpec> styles;
  std::vector<std::string> ids;
};

Grid make_grid(const std::vector<int>& noise, std::size_t samples) {
  Grid g;
  g.data = generate_style_grid(SimConfig{}, kDefaultSpeeds, noise, samples, 7);
  for (const auto& d : g.data) {
    g.ptrs.push_back(&d.data);
    g.styles.push_back(d.style);
    g.ids.push_back(d.style.id());
  }
  return g;
}

struct Study {
  std::vector<std::vector<AccuracyResult>> acc;  // [mapper][metric]
};

Study evaluate(const Grid& grid, const std::vector<StateMapper>& mappers, const std::vector<MetricConfig>& metrics,
               std::size_t trials_per_style, std::size_t samples) {
  Evaluation eval;
  eval.mappers = mappers;
  eval.metrics = metrics;
  for (const auto& m : mappers) eval.candidates.push_back(build_candidates(m, grid.ptrs));
  // Targets come from base seeds 1000.., candidates from seed 7.
  const auto source = fresh_targets(SimConfig{}, grid.styles, grid.ids, samples, 1000);
  const auto out = run_trials(eval, source, trials_per_style * grid.styles.size());
  Study s;
  s.acc.resize(mappers.size());
  for (std::size_t m = 0; m < mappers.size(); ++m)
    for (std::size_t k = 0; k < metrics.size(); ++k) s.acc[m].push_back(summarize(out[m][k]));
  return s;
}

double hsd_mean(const Study& s, std::size_t first_hsd, std::size_t metric_index) {
  double sum = 0;
  for (std::size_t m = first_hsd; m < s.acc.size(); ++m) sum += s.acc[m][metric_index].percent;
  return sum / static_cast<double>(s.acc.size() - first_hsd);
}

std::string join_acc(const Study& s, std::size_t first, std::size_t metric_index) {
  std::string out;
  for (std::size_t m = first; m < s.acc.size(); ++m) out += (out.empty() ? "" : "/") + fmt(s.acc[m][metric_index].percent, 1);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"playstyle acceptance run"};
  Options opt;
  app.add_option("--trials", opt.trials, "target datasets per style")->capture_default_str();
  app.add_option("--samples", opt.samples, "samples per dataset")->capture_default_str();
  app.add_option("--info-trials", opt.info_trials, "trials per style for the informational noise levels")
      ->capture_default_str();
  app.add_option("--epochs", opt.epochs, "HSD training epochs")->capture_default_str();
  app.add_option("--work", opt.work, "directory for models, loss curves and result tables");
  CLI11_PARSE(app, argc, argv);

  const auto start = Clock::now();
  golden();
  distribution_suite();
  metric_axioms();
  gradient_check();

  // Three HSD models on the zero-noise 5-speed grid.
  const auto clean = make_grid({0}, opt.samples);
  PlayDataset train_ds("train", ActionSpace::continuous(2), SimConfig{}.obs_shape());
  for (const auto& g : clean.data)
    for (std::size_t i = 0; i < g.data.size(); ++i) train_ds.append_from(g.data, i);
  std::vector<StateMapper> hsd;
  std::vector<std::size_t> usage;
  if (!opt.work.empty()) fs::create_directories(opt.work);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    HsdConfig cfg;
    cfg.epochs = opt.epochs;
    cfg.seed = seed;
    const auto t0 = Clock::now();
    auto result = train(init_model(cfg), train_ds);
    std::cerr << "trained HSD seed " << seed << " in " << fmt(elapsed(t0), 1) << " s, L_rec "
              << fmt(result.curve.front().l_rec, 4) << " -> " << fmt(result.curve.back().l_rec, 4) << std::endl;
    usage.push_back(codebook_usage(result.model, train_ds, 1));
    if (!opt.work.empty()) {
      const auto base = fs::path(opt.work) / ("hsd_seed" + std::to_string(seed));
      save_model(result.model, base.string() + ".hsdm");
      write_loss_csv(result.curve, base.string() + ".loss.csv");
    }
    hsd.push_back(StateMapper::hsd(std::make_shared<const HsdModel>(std::move(result.model)), 1));
  }
  std::cerr << "hierarchy-1 codebook usage " << usage[0] << "/" << usage[1] << "/" << usage[2] << " over "
            << train_ds.size() << " samples" << std::endl;

  // 6: 5-speed zero-noise grid, LRD and HSD at t=2; Pixel on the 25-style grid.
  {
    auto t0 = Clock::now();
    std::vector<StateMapper> mappers{StateMapper::lrd()};
    mappers.insert(mappers.end(), hsd.begin(), hsd.end());
    const auto s = evaluate(clean, mappers, {metric(2)}, opt.trials, opt.samples);
    const double lrd = s.acc[0][0].percent, mean = hsd_mean(s, 1, 0);
    std::cerr << "speed grid evaluated in " << fmt(elapsed(t0), 1) << " s" << std::endl;

    t0 = Clock::now();
    const auto full = make_grid({1, 2, 3, 4, 5}, opt.samples);
    const auto p = evaluate(full, {StateMapper::pixel()}, {metric(2)}, opt.trials, opt.samples);
    const double pixel = p.acc[0][0].percent;
    std::cerr << "25-style pixel grid evaluated in " << fmt(elapsed(t0), 1) << " s" << std::endl;

    report(6, lrd >= 60 && mean >= 80 && pixel <= 10,
           "accuracy: LRD " + fmt(lrd, 1) + "% (>=60), HSD mean " + fmt(mean, 1) + "% (>=80; seeds " +
               join_acc(s, 1, 0) + "), Pixel on 25 styles " + fmt(pixel, 1) + "% (<=10, " +
               std::to_string(p.acc[0][0].no_prediction) + "/" + std::to_string(p.acc[0][0].total) +
               " without prediction)");
  }

  // 7: d(D60, D70) < d(D60, D80) with each HSD model.
  {
    std::size_t ordered = 0, undefined = 0, total = 0;
    std::vector<std::size_t> per_model(hsd.size());
    for (std::size_t m = 0; m < hsd.size(); ++m) {
      for (std::uint64_t rep = 0; rep < 20; ++rep) {
        const std::uint64_t seed = 5000 + rep;
        const auto d60 = build_state_table(hsd[m], generate_style_dataset(SimConfig{}, make_style(60, 0), opt.samples, seed));
        const auto d70 = build_state_table(hsd[m], generate_style_dataset(SimConfig{}, make_style(70, 0), opt.samples, seed));
        const auto d80 = build_state_table(hsd[m], generate_style_dataset(SimConfig{}, make_style(80, 0), opt.samples, seed));
        const auto near = playstyle_distance(d60, d70, metric(2));
        const auto far = playstyle_distance(d60, d80, metric(2));
        ++total;
        if (!near.defined()) {
          ++undefined;
          continue;
        }
        // An undefined far distance is +inf, so the ordering holds.
        if (!far.defined() || *near.value < *far.value) {
          ++ordered;
          ++per_model[m];
        }
      }
    }
    bool all = true;
    std::string detail;
    for (std::size_t m = 0; m < hsd.size(); ++m) {
      all = all && per_model[m] >= 18;
      detail += (detail.empty() ? "" : "/") + std::to_string(per_model[m]);
    }
    report(7, all,
           "consistency ordering: d(60,70) < d(60,80) in " + detail + " of 20 repetitions per HSD seed (>=18 each), " +
               std::to_string(undefined) + " undefined");
  }

  // 8: accuracy from t=1 to t=4 on the noisy 5-speed grids.
  {
    const std::vector<MetricConfig> ts{metric(1), metric(2), metric(4)};
    std::vector<StateMapper> mappers{StateMapper::lrd()};
    mappers.insert(mappers.end(), hsd.begin(), hsd.end());
    std::string info;
    bool pass = false;
    std::string headline;
    for (int level = 5; level >= 1; --level) {
      const auto t0 = Clock::now();
      const auto grid = make_grid({level}, opt.samples);
      const std::size_t trials = level == 5 ? opt.trials : opt.info_trials;
      const auto s = evaluate(grid, mappers, ts, trials, opt.samples);
      std::cerr << "noise level " << level << " evaluated in " << fmt(elapsed(t0), 1) << " s: HSD mean t=1/2/4 "
                << fmt(hsd_mean(s, 1, 0), 1) << "/" << fmt(hsd_mean(s, 1, 1), 1) << "/" << fmt(hsd_mean(s, 1, 2), 1)
                << ", LRD " << fmt(s.acc[0][0].percent, 1) << "/" << fmt(s.acc[0][1].percent, 1) << "/"
                << fmt(s.acc[0][2].percent, 1) << " (" << trials << " trials/style)" << std::endl;
      if (level == 5) {
        const double t1 = hsd_mean(s, 1, 0), t4 = hsd_mean(s, 1, 2);
        pass = t4 >= t1;
        headline = "noise level 5 HSD mean " + fmt(t1, 1) + "% (t=1) -> " + fmt(hsd_mean(s, 1, 1), 1) + "% (t=2) -> " +
                   fmt(t4, 1) + "% (t=4); LRD " + fmt(s.acc[0][0].percent, 1) + "% -> " +
                   fmt(s.acc[0][2].percent, 1) + "%";
      } else {
        info += " n" + std::to_string(level) + " " + fmt(hsd_mean(s, 1, 0), 0) + "->" + fmt(hsd_mean(s, 1, 2), 0);
      }
    }
    report(8, pass, "threshold study: " + headline + "; HSD t=1->t=4 at lower noise:" + info);
  }

  std::cerr << "total " << fmt(elapsed(start), 1) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
