#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "playstyle/discretizer.hpp"

namespace playstyle {

enum class Aggregation { kUniform, kExpected };
enum class DistanceKind { kW1, kW2, kKl, kMkl };

struct MetricConfig {
  std::size_t threshold = 2;
  Aggregation aggregation = Aggregation::kExpected;
  DistanceKind distance = DistanceKind::kW2;
  // Gaussian W2 only: square the mean term (standard Frechet form).
  bool squared_mean = false;

  // Throws ConfigError for t == 0.
  void validate() const;
};

std::string to_string(Aggregation a);
std::string to_string(DistanceKind d);
Aggregation parse_aggregation(const std::string& s);
DistanceKind parse_distance_kind(const std::string& s);

struct StateBreakdown {
  DiscreteState state;
  double distance = 0;
  double weight_a = 0;  // A's visit share over the intersection
  double weight_b = 0;
};

struct DistanceResult {
  std::optional<double> value;  // empty when the intersection is empty
  std::size_t intersection_size = 0;
  std::vector<StateBreakdown> per_state;  // in intersection order

  bool defined() const noexcept { return value.has_value(); }
};

// States visited at least t times in both tables, sorted by DiscreteState's order.
std::vector<DiscreteState> intersect_states(const StateTable& a, const StateTable& b, std::size_t t);

// Distance between the action distributions fitted at `s` in each table.
// Throws LookupError when either table lacks `s`. Continuous action spaces
// support only W2.
double policy_distance(const StateTable& a, const StateTable& b, const DiscreteState& s, const MetricConfig& cfg);

DistanceResult playstyle_distance(const StateTable& a, const StateTable& b, const MetricConfig& cfg);

// Gaussian W2 between the feature clouds (n x dim, back to back).
double continuous_baseline(std::span<const float> feat_a, std::span<const float> feat_b, std::size_t dim,
                           bool squared_mean = false);

struct Candidate {
  std::string id;
  const StateTable* table = nullptr;
};

struct Prediction {
  std::size_t index = 0;
  std::string id;
  std::vector<DistanceResult> distances;  // one per candidate, in order
};

// argmin over candidates, undefined ranked as +inf, ties to the earliest.
// Throws PredictionError when every distance is undefined.
Prediction predict_style(const StateTable& target, std::span<const Candidate> candidates, const MetricConfig& cfg);

struct TrialOutcome {
  std::optional<std::size_t> predicted;  // empty: every distance undefined
  std::size_t truth = 0;
  std::size_t true_intersection = 0;
  std::size_t undefined = 0;
  std::size_t candidates = 0;

  bool correct() const noexcept { return predicted && *predicted == truth; }
};

// One prediction, candidates evaluated in order on the calling thread.
TrialOutcome score_trial(const StateTable& target, std::size_t truth, std::span<const Candidate> candidates,
                         const MetricConfig& cfg);

struct AccuracyResult {
  double percent = 0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t no_prediction = 0;
  double mean_intersection = 0;  // target vs its true candidate
  double undefined_rate = 0;     // over all target/candidate pairs
};

// No-prediction trials count as incorrect. Throws EvaluationError when empty.
AccuracyResult summarize(std::span<const TrialOutcome> outcomes);

// Throws EvaluationError on empty targets, ConfigError when a true id has no
// candidate.
AccuracyResult accuracy(std::span<const Candidate> targets, std::span<const Candidate> candidates,
                        const MetricConfig& cfg);

// Index of `id` among candidates; ConfigError when absent.
std::size_t candidate_index(std::span<const Candidate> candidates, const std::string& id);

// Throws what policy_distance would throw inside a parallel loop (missing
// tables, mixed action spaces, unsupported distance kinds).
void check_candidates(const StateTable& target, std::span<const Candidate> candidates, const MetricConfig& cfg);

// Two tiny labelled datasets over 3 discrete actions with 1x1 observations;
// the observation byte is the state. Under the pixel mapper they give
// per-state W2 of 1.225, 0.707, 0.707 on the shared states, and each side
// has one state of its own that never intersects.
std::pair<PlayDataset, PlayDataset> golden_fixture();

}  // namespace playstyle
