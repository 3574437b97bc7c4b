#include "playstyle/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>

#include "playstyle/errors.hpp"

namespace playstyle {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const TrainingError*>(&e)) return kExitDivergence;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e)) return kExitUsage;
  return kExitData;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  if (trim(text).empty()) throw ConfigError("empty integer list");
  std::vector<int> out;
  for (const auto& raw : split(text, ',')) {
    const auto item = trim(raw);
    if (item.empty()) throw ConfigError("empty item in list '" + text + "'");
    try {
      std::size_t used = 0;
      if (const auto dots = item.find(".."); dots != std::string::npos) {
        const int lo = std::stoi(item.substr(0, dots), &used);
        if (used != dots) throw std::invalid_argument(item);
        const auto tail = item.substr(dots + 2);
        const int hi = std::stoi(tail, &used);
        if (used != tail.size() || hi < lo) throw std::invalid_argument(item);
        for (int v = lo; v <= hi; ++v) out.push_back(v);
      } else {
        out.push_back(std::stoi(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      }
    } catch (const std::logic_error&) {
      throw ConfigError("bad integer list '" + text + "'");
    }
  }
  return out;
}

void write_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "id,path,speed,noise_level,sigma_steer,sigma_accel,seed\n";
  out << std::setprecision(17);
  for (const auto& e : entries) {
    out << e.id << ',' << e.path << ',' << e.style.target_speed << ',' << e.style.noise_level << ','
        << e.style.sigma_steer << ',' << e.style.sigma_accel << ',' << e.seed << '\n';
  }
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "id,path,speed,noise_level,sigma_steer,sigma_accel,seed") {
    throw FormatError("manifest: bad header in " + path.string());
  }
  std::vector<ManifestEntry> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split(trim(line), ',');
    if (f.size() != 7) throw FormatError("manifest line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      ManifestEntry e;
      e.id = f[0];
      e.path = f[1];
      e.style.target_speed = std::stod(f[2]);
      e.style.noise_level = std::stoi(f[3]);
      e.style.sigma_steer = std::stod(f[4]);
      e.style.sigma_accel = std::stod(f[5]);
      e.seed = std::stoull(f[6]);
      out.push_back(std::move(e));
    } catch (const std::logic_error&) {
      throw FormatError("manifest line " + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

std::vector<LoadedDataset> load_manifest_dir(const std::filesystem::path& dir) {
  auto entries = read_manifest(dir / kManifestName);
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::set<std::string> ids;
  std::vector<LoadedDataset> out;
  for (auto& e : entries) {
    if (!ids.insert(e.id).second) throw FormatError("manifest: duplicate id '" + e.id + "'");
    auto ds = load_dataset(dir / e.path);
    ds.set_id(e.id);
    out.push_back({std::move(e), std::move(ds)});
  }
  return out;
}

std::vector<ManifestEntry> write_style_grid(const std::vector<GridDataset>& grid, std::uint64_t seed,
                                            const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<ManifestEntry> rows;
  for (const auto& g : grid) {
    ManifestEntry e{g.style.id(), g.style.id() + ".psty", g.style, seed};
    save_dataset(g.data, dir / e.path);
    rows.push_back(std::move(e));
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  write_manifest(rows, dir / kManifestName);
  return rows;
}

StateMapper parse_mapper(const std::string& spec) {
  if (spec == "pixel") return StateMapper::pixel();
  if (spec == "lrd") return StateMapper::lrd();
  if (spec.rfind("lrd:", 0) == 0) {
    unsigned h = 0, w = 0, div = 0;
    char tail = 0;
    if (std::sscanf(spec.c_str() + 4, "%ux%u/%u%c", &h, &w, &div, &tail) != 3) {
      throw ConfigError("mapper: expected lrd:HxW/div, got '" + spec + "'");
    }
    return StateMapper::lrd(h, w, div);
  }
  if (spec.rfind("hsd:", 0) == 0) {
    std::string path = spec.substr(4);
    int hierarchy = 1;
    if (const auto at = path.rfind('@'); at != std::string::npos) {
      const auto h = path.substr(at + 1);
      if (h != "0" && h != "1") throw ConfigError("mapper: hierarchy must be 0 or 1 in '" + spec + "'");
      hierarchy = h == "0" ? 0 : 1;
      path.erase(at);
    }
    if (path.empty()) throw ConfigError("mapper: missing model path in '" + spec + "'");
    return StateMapper::hsd(std::make_shared<const HsdModel>(load_model(path)), hierarchy);
  }
  throw ConfigError("unknown mapper '" + spec + "'");
}

std::vector<Candidate> CandidateSet::view() const {
  std::vector<Candidate> v;
  v.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) v.push_back({ids[i], &tables[i]});
  return v;
}

CandidateSet build_candidates(const StateMapper& mapper, const std::vector<const PlayDataset*>& datasets) {
  CandidateSet set;
  for (const auto* ds : datasets) {
    set.ids.push_back(ds->id());
    set.tables.push_back(build_state_table(mapper, *ds));
  }
  return set;
}

std::vector<std::vector<std::vector<TrialOutcome>>> run_trials(const Evaluation& eval, const TargetSource& source,
                                                               std::size_t trials) {
  if (eval.mappers.size() != eval.candidates.size()) throw ConfigError("run_trials: one candidate set per mapper");
  if (eval.metrics.empty()) throw ConfigError("run_trials: no metric configurations");
  if (trials == 0) throw EvaluationError("run_trials: no trials");
  std::vector<std::vector<Candidate>> views;
  for (const auto& c : eval.candidates) {
    if (c.ids.empty()) throw ConfigError("run_trials: empty candidate set");
    views.push_back(c.view());
    for (const auto& m : eval.metrics) check_candidates(c.tables.front(), views.back(), m);
  }

  std::vector<std::vector<std::vector<TrialOutcome>>> out(
      eval.mappers.size(),
      std::vector<std::vector<TrialOutcome>>(eval.metrics.size(), std::vector<TrialOutcome>(trials)));
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto n = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      const auto trial = static_cast<std::size_t>(i);
      const PlayDataset target = source(trial);
      for (std::size_t m = 0; m < eval.mappers.size(); ++m) {
        const auto truth = candidate_index(views[m], target.id());
        const auto table = table_from_states(eval.mappers[m].map_all(target), target);
        for (std::size_t k = 0; k < eval.metrics.size(); ++k) {
          out[m][k][trial] = score_trial(table, truth, views[m], eval.metrics[k]);
        }
      }
    } catch (...) {
      std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

TargetSource fresh_targets(const SimConfig& cfg, std::vector<StyleSpec> styles, std::vector<std::string> ids,
                           std::size_t samples, std::uint64_t seed) {
  if (styles.empty() || styles.size() != ids.size()) throw ConfigError("fresh_targets: one id per style");
  cfg.validate();
  for (const auto& s : styles) s.validate();
  if (samples == 0) throw SizeError("fresh_targets: samples must be positive");
  return [cfg, styles = std::move(styles), ids = std::move(ids), samples, seed](std::size_t trial) {
    const std::size_t k = trial % styles.size();
    auto ds = generate_style_dataset(cfg, styles[k], samples, seed + trial / styles.size());
    ds.set_id(ids[k]);
    return ds;
  };
}

std::vector<ResultRow> per_style_rows(const std::string& configuration, const std::vector<std::string>& ids,
                                      std::span<const TrialOutcome> outcomes) {
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
  std::vector<ResultRow> rows;
  for (auto k : order) {
    std::vector<TrialOutcome> mine;
    for (const auto& o : outcomes) {
      if (o.truth == k) mine.push_back(o);
    }
    if (!mine.empty()) rows.push_back({configuration, ids[k], summarize(mine)});
  }
  return rows;
}

AccuracyResult mean_result(std::span<const AccuracyResult> results) {
  if (results.empty()) throw EvaluationError("mean_result: nothing to average");
  AccuracyResult m;
  for (const auto& r : results) {
    m.percent += r.percent;
    m.mean_intersection += r.mean_intersection;
    m.undefined_rate += r.undefined_rate;
    m.correct += r.correct;
    m.total += r.total;
    m.no_prediction += r.no_prediction;
  }
  const auto n = static_cast<double>(results.size());
  m.percent /= n;
  m.mean_intersection /= n;
  m.undefined_rate /= n;
  return m;
}

void write_result_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "configuration,style,accuracy,correct,total,no_prediction,mean_intersection,undefined_rate\n";
  out << std::setprecision(9);
  for (const auto& r : rows) {
    out << r.configuration << ',' << r.style << ',' << r.result.percent << ',' << r.result.correct << ',' << r.result.total << ','
        << r.result.no_prediction << ',' << r.result.mean_intersection << ',' << r.result.undefined_rate << '\n';
  }
}

void print_result_table(const std::vector<ResultRow>& rows, std::ostream& out) {
  std::size_t width = std::string("configuration").size();
  for (const auto& r : rows) width = std::max(width, r.configuration.size());
  const auto old_flags = out.flags();
  const auto old_prec = out.precision();
  out << std::left << std::setw(static_cast<int>(width)) << "configuration" << std::right << std::setw(10)
      << "accuracy" << std::setw(10) << "trials" << std::setw(14) << "mean |S|" << std::setw(12) << "undefined"
      << '\n';
  out << std::fixed;
  for (const auto& r : rows) {
    out << std::left << std::setw(static_cast<int>(width)) << r.configuration << std::right << std::setw(9)
        << std::setprecision(2) << r.result.percent << '%' << std::setw(10) << r.result.total << std::setw(14)
        << std::setprecision(1) << r.result.mean_intersection << std::setw(11) << std::setprecision(1)
        << 100.0 * r.result.undefined_rate << '%' << '\n';
  }
  out.flags(old_flags);
  out.precision(old_prec);
}

}  // namespace playstyle
