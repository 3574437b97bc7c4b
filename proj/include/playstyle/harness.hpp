#pragma once

// Experiment plumbing shared by the command-line tool and the acceptance
// runner: manifests, config files, mapper specs and the trial loop.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "playstyle/discretizer.hpp"
#include "playstyle/hsd.hpp"
#include "playstyle/metric.hpp"
#include "playstyle/sim.hpp"

namespace playstyle {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitUndefined = 4,
  kExitDivergence = 5,
};

// Maps a library exception to the documented exit code.
int exit_code_for(const std::exception& e);

// "1..5", "0,2,4" or a mix such as "0,3..5".
std::vector<int> parse_int_list(const std::string& text);

struct ManifestEntry {
  std::string id;
  std::string path;  // relative to the manifest's directory
  StyleSpec style;
  std::uint64_t seed = 0;
};

inline constexpr const char* kManifestName = "manifest.csv";

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct LoadedDataset {
  ManifestEntry entry;
  PlayDataset data;
};

// Reads <dir>/manifest.csv and every dataset it lists, sorted by id.
std::vector<LoadedDataset> load_manifest_dir(const std::filesystem::path& dir);

// Writes one .psty per grid entry plus the manifest, returns the manifest rows.
std::vector<ManifestEntry> write_style_grid(const std::vector<GridDataset>& grid, std::uint64_t seed,
                                            const std::filesystem::path& dir);

// "pixel", "lrd" or "lrd:HxW/div", "hsd:<model path>" or "hsd:<model path>@<hierarchy>".
StateMapper parse_mapper(const std::string& spec);

// Per-mapper candidate tables built once and reused across trials.
struct CandidateSet {
  std::vector<std::string> ids;
  std::vector<StateTable> tables;

  std::vector<Candidate> view() const;
};

CandidateSet build_candidates(const StateMapper& mapper, const std::vector<const PlayDataset*>& datasets);

// Produces the target dataset for trial i; must be thread-safe.
using TargetSource = std::function<PlayDataset(std::size_t trial)>;

struct Evaluation {
  std::vector<StateMapper> mappers;
  std::vector<CandidateSet> candidates;  // one per mapper
  std::vector<MetricConfig> metrics;
};

// outcomes[mapper][metric][trial]. Every target is generated once and mapped
// by every mapper. The target's id names its true candidate. Parallel over
// trials; the result does not depend on scheduling.
std::vector<std::vector<std::vector<TrialOutcome>>> run_trials(const Evaluation& eval, const TargetSource& source,
                                                               std::size_t trials);

// Fresh zero-overlap targets: trial i is style (i % styles.size()) with base
// seed `seed + i / styles.size()`.
TargetSource fresh_targets(const SimConfig& cfg, std::vector<StyleSpec> styles, std::vector<std::string> ids,
                           std::size_t samples, std::uint64_t seed);

struct ResultRow {
  std::string configuration;
  std::string style = "all";
  AccuracyResult result;
};

// Per-style rows (sorted by id) for outcomes whose truth indexes `ids`.
std::vector<ResultRow> per_style_rows(const std::string& configuration, const std::vector<std::string>& ids,
                                      std::span<const TrialOutcome> outcomes);

// Mean of several rows' percentages, intersections and undefined rates;
// counts are summed.
AccuracyResult mean_result(std::span<const AccuracyResult> results);

void write_result_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
void print_result_table(const std::vector<ResultRow>& rows, std::ostream& out);

}  // namespace playstyle
