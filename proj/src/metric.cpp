#include "playstyle/metric.hpp"

#include <algorithm>
#include <limits>

#include "playstyle/action_dist.hpp"
#include "playstyle/errors.hpp"

namespace playstyle {

void MetricConfig::validate() const {
  if (threshold == 0) throw ConfigError("metric: threshold must be at least 1");
}

std::string to_string(Aggregation a) { return a == Aggregation::kUniform ? "uniform" : "expected"; }

std::string to_string(DistanceKind d) {
  switch (d) {
    case DistanceKind::kW1:
      return "w1";
    case DistanceKind::kW2:
      return "w2";
    case DistanceKind::kKl:
      return "kl";
    case DistanceKind::kMkl:
      return "mkl";
  }
  return {};
}

Aggregation parse_aggregation(const std::string& s) {
  if (s == "uniform") return Aggregation::kUniform;
  if (s == "expected") return Aggregation::kExpected;
  throw ConfigError("unknown aggregation '" + s + "'");
}

DistanceKind parse_distance_kind(const std::string& s) {
  if (s == "w1") return DistanceKind::kW1;
  if (s == "w2") return DistanceKind::kW2;
  if (s == "kl") return DistanceKind::kKl;
  if (s == "mkl") return DistanceKind::kMkl;
  throw ConfigError("unknown distance kind '" + s + "'");
}

std::vector<DiscreteState> intersect_states(const StateTable& a, const StateTable& b, std::size_t t) {
  const bool a_small = a.num_states() <= b.num_states();
  const StateTable& small = a_small ? a : b;
  const StateTable& large = a_small ? b : a;
  std::vector<DiscreteState> out;
  for (const auto& [s, e] : small.entries()) {
    if (e.count < t) continue;
    if (large.visits(s) >= t) out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

double entry_distance(const StateEntry& ea, const StateEntry& eb, const ActionSpace& space, const MetricConfig& cfg) {
  if (space.kind == ActionKind::kDiscrete) {
    const auto p = fit_categorical(ea.indices, space.size);
    const auto q = fit_categorical(eb.indices, space.size);
    switch (cfg.distance) {
      case DistanceKind::kW1:
        return w1_categorical(p, q);
      case DistanceKind::kW2:
        return w2_categorical(p, q);
      case DistanceKind::kKl:
        return kl_categorical(p, q);
      case DistanceKind::kMkl:
        return mkl_categorical(p, q);
    }
  }
  if (cfg.distance != DistanceKind::kW2) {
    throw ConfigError("metric: continuous actions support only the w2 distance");
  }
  return w2_gaussian(fit_gaussian(ea.values, space.size), fit_gaussian(eb.values, space.size), cfg.squared_mean);
}

void check_compatible(const StateTable& a, const StateTable& b) {
  if (!(a.action_space() == b.action_space())) throw ShapeError("metric: tables have different action spaces");
}

// Everything that could throw inside a parallel region is checked up front.
void check_batch(const StateTable& first, std::span<const Candidate> others, const MetricConfig& cfg) {
  for (const auto& c : others) {
    if (!c.table) throw ConfigError("metric: candidate '" + c.id + "' has no table");
    check_compatible(first, *c.table);
  }
  if (first.action_space().kind == ActionKind::kContinuous && cfg.distance != DistanceKind::kW2) {
    throw ConfigError("metric: continuous actions support only the w2 distance");
  }
}

}  // namespace

double policy_distance(const StateTable& a, const StateTable& b, const DiscreteState& s, const MetricConfig& cfg) {
  check_compatible(a, b);
  const auto* ea = a.find(s);
  const auto* eb = b.find(s);
  if (!ea || !eb) throw LookupError("policy_distance: state missing from a table");
  return entry_distance(*ea, *eb, a.action_space(), cfg);
}

DistanceResult playstyle_distance(const StateTable& a, const StateTable& b, const MetricConfig& cfg) {
  cfg.validate();
  check_compatible(a, b);
  DistanceResult r;
  const auto states = intersect_states(a, b, cfg.threshold);
  r.intersection_size = states.size();
  if (states.empty()) return r;

  double mass_a = 0;
  double mass_b = 0;
  r.per_state.reserve(states.size());
  for (const auto& s : states) {
    const auto& ea = *a.find(s);
    const auto& eb = *b.find(s);
    r.per_state.push_back({s, entry_distance(ea, eb, a.action_space(), cfg), static_cast<double>(ea.count),
                           static_cast<double>(eb.count)});
    mass_a += static_cast<double>(ea.count);
    mass_b += static_cast<double>(eb.count);
  }
  double value = 0;
  for (auto& ps : r.per_state) {
    ps.weight_a /= mass_a;
    ps.weight_b /= mass_b;
    if (cfg.aggregation == Aggregation::kUniform) {
      value += ps.distance;
    } else {
      // d(A|B) weighs by B's visits, d(B|A) by A's; the result is their mean.
      value += 0.5 * (ps.weight_a + ps.weight_b) * ps.distance;
    }
  }
  if (cfg.aggregation == Aggregation::kUniform) value /= static_cast<double>(r.per_state.size());
  r.value = value;
  return r;
}

double continuous_baseline(std::span<const float> feat_a, std::span<const float> feat_b, std::size_t dim,
                           bool squared_mean) {
  return w2_gaussian(fit_gaussian(feat_a, dim), fit_gaussian(feat_b, dim), squared_mean);
}

Prediction predict_style(const StateTable& target, std::span<const Candidate> candidates, const MetricConfig& cfg) {
  if (candidates.empty()) throw ConfigError("predict_style: no candidates");
  cfg.validate();
  check_batch(target, candidates, cfg);
  Prediction p;
  p.distances.resize(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    p.distances[static_cast<std::size_t>(i)] =
        playstyle_distance(target, *candidates[static_cast<std::size_t>(i)].table, cfg);
  }
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& d = p.distances[i];
    if (d.defined() && (!found || *d.value < best)) {
      best = *d.value;
      p.index = i;
      found = true;
    }
  }
  if (!found) throw PredictionError("predict_style: every candidate distance is undefined");
  p.id = candidates[p.index].id;
  return p;
}

std::size_t candidate_index(std::span<const Candidate> candidates, const std::string& id) {
  auto it = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) { return c.id == id; });
  if (it == candidates.end()) throw ConfigError("no candidate for true id '" + id + "'");
  return static_cast<std::size_t>(it - candidates.begin());
}

void check_candidates(const StateTable& target, std::span<const Candidate> candidates, const MetricConfig& cfg) {
  cfg.validate();
  check_batch(target, candidates, cfg);
}

TrialOutcome score_trial(const StateTable& target, std::size_t truth, std::span<const Candidate> candidates,
                         const MetricConfig& cfg) {
  TrialOutcome o;
  o.truth = truth;
  o.candidates = candidates.size();
  double best = 0;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto d = playstyle_distance(target, *candidates[j].table, cfg);
    if (j == truth) o.true_intersection = d.intersection_size;
    if (!d.defined()) {
      ++o.undefined;
      continue;
    }
    if (!o.predicted || *d.value < best) {
      best = *d.value;
      o.predicted = j;
    }
  }
  return o;
}

AccuracyResult summarize(std::span<const TrialOutcome> outcomes) {
  if (outcomes.empty()) throw EvaluationError("accuracy: no targets");
  AccuracyResult r;
  r.total = outcomes.size();
  double inter = 0;
  double undefined = 0;
  double pairs = 0;
  for (const auto& o : outcomes) {
    if (!o.predicted) ++r.no_prediction;
    if (o.correct()) ++r.correct;
    inter += static_cast<double>(o.true_intersection);
    undefined += static_cast<double>(o.undefined);
    pairs += static_cast<double>(o.candidates);
  }
  r.percent = 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total);
  r.mean_intersection = inter / static_cast<double>(r.total);
  r.undefined_rate = pairs > 0 ? undefined / pairs : 0.0;
  return r;
}

AccuracyResult accuracy(std::span<const Candidate> targets, std::span<const Candidate> candidates,
                        const MetricConfig& cfg) {
  if (targets.empty()) throw EvaluationError("accuracy: no targets");
  if (candidates.empty()) throw ConfigError("accuracy: no candidates");
  cfg.validate();
  std::vector<std::size_t> truth(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!targets[i].table) throw ConfigError("accuracy: target has no table");
    truth[i] = candidate_index(candidates, targets[i].id);
  }
  check_batch(*targets.front().table, targets, cfg);
  check_batch(*targets.front().table, candidates, cfg);

  std::vector<TrialOutcome> outcomes(targets.size());
  const auto n = static_cast<std::ptrdiff_t>(targets.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    outcomes[k] = score_trial(*targets[k].table, truth[k], candidates, cfg);
  }
  return summarize(outcomes);
}

std::pair<PlayDataset, PlayDataset> golden_fixture() {
  const auto space = ActionSpace::discrete(3);
  PlayDataset a("A", space, {1, 1});
  PlayDataset b("B", space, {1, 1});
  auto put = [](PlayDataset& ds, std::uint8_t state, std::uint32_t action) {
    const std::uint8_t obs[1] = {state};
    ds.add(obs, action);
  };
  // state 1: A always plays 0, B splits 1/2.
  for (int i = 0; i < 3; ++i) put(a, 1, 0);
  put(b, 1, 1);
  put(b, 1, 2);
  // state 2
  put(a, 2, 1);
  put(a, 2, 2);
  put(b, 2, 1);
  // state 3
  put(a, 3, 2);
  put(b, 3, 1);
  put(b, 3, 2);
  // states seen by one side only
  put(a, 4, 0);
  put(b, 5, 1);
  put(b, 5, 1);
  return {std::move(a), std::move(b)};
}

}  // namespace playstyle
