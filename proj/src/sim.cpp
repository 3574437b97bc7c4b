#include "playstyle/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "playstyle/errors.hpp"

namespace playstyle {

void SimConfig::validate() const {
  if (!(track_length > 0) || !(segment_length > 0) || transition < 0 || transition > segment_length) {
    throw ConfigError("sim: track lengths must be positive and transition within a segment");
  }
  if (!(max_speed > 0) || !(dt > 0)) throw ConfigError("sim: max speed and dt must be positive");
  if (init_speed_min < 0 || init_speed_max < init_speed_min || init_speed_max > max_speed) {
    throw ConfigError("sim: bad initial speed range");
  }
  if (frames == 0 || height < 8 || width < 8) throw ConfigError("sim: render size too small");
  if (bar_rows == 0 || bar_rows + 6 > height) throw ConfigError("sim: speed bar must leave room for the road");
  if (episode_steps == 0) throw ConfigError("sim: episode length must be positive");
}

void StyleSpec::validate() const {
  if (!(target_speed > 0)) throw ConfigError("sim: target speed must be positive");
  if (sigma_steer < 0 || sigma_accel < 0) throw ConfigError("sim: noise std must be non-negative");
}

std::string StyleSpec::id() const {
  char buf[64];
  std::snprintf(buf, sizeof buf, "s%g_n%d", target_speed, noise_level);
  return buf;
}

std::pair<double, double> noise_level_sigmas(int level) {
  if (level < 0 || level > 5) throw ConfigError("sim: noise level must be in 0..5");
  return {0.01 * level, 0.005 * level};
}

StyleSpec make_style(double speed, int noise_level) {
  const auto [s, a] = noise_level_sigmas(noise_level);
  return {speed, s, a, noise_level};
}

Track::Track(const SimConfig& cfg)
    : length_(cfg.track_length), segment_(cfg.segment_length), transition_(cfg.transition) {
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length_ / segment_)));
  std::mt19937_64 rng(cfg.track_seed);
  std::uniform_int_distribution<int> pick(-1, 1);
  classes_.resize(n);
  for (auto& c : classes_) c = pick(rng);
}

double Track::curvature(double position) const {
  double p = std::fmod(position, length_);
  if (p < 0) p += length_;
  const auto seg = std::min(classes_.size() - 1, static_cast<std::size_t>(p / segment_));
  const double into = p - static_cast<double>(seg) * segment_;
  const double here = classes_[seg];
  const double seg_len = seg + 1 == classes_.size() ? length_ - static_cast<double>(seg) * segment_ : segment_;
  const double left = seg_len - into;
  if (transition_ <= 0 || left >= transition_) return here;
  const double next = classes_[(seg + 1) % classes_.size()];
  return here + (next - here) * (1.0 - left / transition_);
}

namespace {

constexpr std::uint8_t kBackground = 40;
constexpr std::uint8_t kRoad = 150;
constexpr std::uint8_t kCar = 255;
constexpr std::uint8_t kBar = 255;
constexpr double kRoadHalfWidth = 7.0;   // pixels
constexpr double kOffsetScale = 6.0;     // pixels per unit lateral offset
constexpr double kBendScale = 6.0;       // pixels at the far edge per unit curvature
constexpr double kLookahead = 2.0;       // track units per road row

// Length of [a, b] inside [lo, hi].
double overlap(double a, double b, double lo, double hi) { return std::max(0.0, std::min(b, hi) - std::max(a, lo)); }

std::uint8_t blend(std::uint8_t base, std::uint8_t over, double cover) {
  return static_cast<std::uint8_t>(std::lround(base + (over - base) * std::clamp(cover, 0.0, 1.0)));
}

}  // namespace

std::vector<std::uint8_t> render_frame(const SimConfig& cfg, const Track& track, const CarState& car) {
  const std::size_t h = cfg.height;
  const std::size_t w = cfg.width;
  std::vector<std::uint8_t> img(h * w, kBackground);

  // Speed bar, anti-aliased at the tip.
  const double bar = std::clamp(car.speed / cfg.max_speed, 0.0, 1.0) * static_cast<double>(w);
  for (std::size_t r = 0; r < cfg.bar_rows; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      img[r * w + c] = blend(kBackground, kBar, bar - static_cast<double>(c));
    }
  }

  // Road below the bar; the bottom row is at the car, upper rows look ahead.
  const std::size_t top = cfg.bar_rows + 1;
  const double centre = static_cast<double>(w) / 2.0;
  const double span = static_cast<double>(h - 1 - top);
  for (std::size_t r = top; r < h; ++r) {
    const double ahead = static_cast<double>(h - 1 - r);
    const double depth = ahead / span;
    const double kappa = track.curvature(car.position + ahead * kLookahead);
    const double cx = centre - car.offset * kOffsetScale + kBendScale * kappa * depth * depth;
    for (std::size_t c = 0; c < w; ++c) {
      const double cov = overlap(static_cast<double>(c), static_cast<double>(c) + 1.0, cx - kRoadHalfWidth,
                                 cx + kRoadHalfWidth);
      img[r * w + c] = blend(kBackground, kRoad, cov);
    }
  }

  // Car: 4x4 block centred at the bottom.
  const std::size_t car_w = 4;
  const std::size_t c0 = w / 2 - car_w / 2;
  for (std::size_t r = h - 5; r < h - 1; ++r) {
    for (std::size_t c = c0; c < c0 + car_w; ++c) img[r * w + c] = kCar;
  }
  return img;
}

Observation stack_frames(const SimConfig& cfg, const std::deque<std::vector<std::uint8_t>>& history) {
  if (history.empty()) throw StateError("sim: no frames to stack");
  const std::size_t frame = static_cast<std::size_t>(cfg.height) * cfg.width;
  Observation obs{cfg.obs_shape(), {}};
  obs.data.reserve(frame * cfg.frames);
  const std::size_t have = history.size();
  for (std::size_t f = 0; f < cfg.frames; ++f) {
    // Slot f of `frames`, oldest first; missing older slots reuse history[0].
    const std::size_t missing = cfg.frames > have ? cfg.frames - have : 0;
    const std::size_t src = f < missing ? 0 : have - cfg.frames + f;
    obs.data.insert(obs.data.end(), history[src].begin(), history[src].end());
  }
  return obs;
}

Observation render_observation(const SimConfig& cfg, const Track& track,
                               std::deque<std::vector<std::uint8_t>>& history, const CarState& car) {
  history.push_back(render_frame(cfg, track, car));
  while (history.size() > cfg.frames) history.pop_front();
  return stack_frames(cfg, history);
}

std::pair<double, double> controller(const SimConfig& cfg, const Track&, const StyleSpec& style,
                                     const CarState& car) {
  const double accel = std::clamp(cfg.speed_gain * (style.target_speed - car.speed), -1.0, 1.0);
  const double steer = std::clamp(-cfg.steer_k * car.offset, -1.0, 1.0);
  return {steer, accel};
}

CarState step_car(const SimConfig& cfg, const Track& track, const CarState& car, double steer, double accel) {
  CarState next;
  next.speed = std::clamp(car.speed + cfg.accel_gain * accel - cfg.drag * car.speed, 0.0, cfg.max_speed);
  next.offset = std::clamp(car.offset + cfg.drift * track.curvature(car.position) * car.speed * cfg.dt +
                               cfg.steer_gain * steer,
                           -1.5, 1.5);
  next.position = std::fmod(car.position + car.speed * cfg.dt, track.length());
  return next;
}

Episode run_episode(const SimConfig& cfg, const StyleSpec& style, std::uint64_t seed) {
  cfg.validate();
  style.validate();
  const Track track(cfg);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  CarState car;
  car.position = u01(rng) * cfg.track_length;
  car.speed = cfg.init_speed_min + u01(rng) * (cfg.init_speed_max - cfg.init_speed_min);
  car.offset = (2.0 * u01(rng) - 1.0) * cfg.init_offset;

  Episode ep{{}, PlayDataset("", ActionSpace::continuous(2), cfg.obs_shape())};
  ep.states.reserve(cfg.episode_steps);
  ep.samples.reserve(cfg.episode_steps);
  std::deque<std::vector<std::uint8_t>> history;
  for (std::uint32_t t = 0; t < cfg.episode_steps; ++t) {
    const auto obs = render_observation(cfg, track, history, car);
    auto [steer, accel] = controller(cfg, track, style, car);
    // Always draw both so the stream does not depend on the noise level.
    const double ns = gauss(rng);
    const double na = gauss(rng);
    steer += style.sigma_steer * ns;
    accel += style.sigma_accel * na;
    const float action[2] = {static_cast<float>(steer), static_cast<float>(accel)};
    ep.states.push_back(car);
    ep.samples.add(obs.data, std::span<const float>(action, 2));
    car = step_car(cfg, track, car, steer, accel);
  }
  return ep;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t style_seed(std::uint64_t seed, const StyleSpec& style) {
  std::uint64_t h = splitmix(seed);
  h = splitmix(h ^ static_cast<std::uint64_t>(std::llround(style.target_speed * 1000.0)));
  h = splitmix(h ^ static_cast<std::uint64_t>(style.noise_level));
  return h;
}

}  // namespace

PlayDataset generate_style_dataset(const SimConfig& cfg, const StyleSpec& style, std::size_t samples,
                                   std::uint64_t seed) {
  cfg.validate();
  style.validate();
  if (samples == 0) throw SizeError("sim: samples per dataset must be positive");
  const std::size_t episodes = (samples + cfg.episode_steps - 1) / cfg.episode_steps;
  const std::uint64_t base = style_seed(seed, style);
  PlayDataset all(style.id(), ActionSpace::continuous(2), cfg.obs_shape());
  all.reserve(episodes * cfg.episode_steps);
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto ep = run_episode(cfg, style, splitmix(base + e));
    for (std::size_t i = 0; i < ep.samples.size(); ++i) all.append_from(ep.samples, i);
  }
  if (all.size() < samples) throw SizeError("sim: not enough episode data");
  auto out = sample_subset(all, samples, splitmix(base ^ 0x5bd1e995ULL));
  out.set_id(style.id());
  return out;
}

std::vector<GridDataset> generate_style_grid(const SimConfig& cfg, const std::vector<double>& speeds,
                                             const std::vector<int>& noise_levels, std::size_t samples,
                                             std::uint64_t seed) {
  if (speeds.empty() || noise_levels.empty()) throw ConfigError("sim: empty speed or noise list");
  cfg.validate();
  if (samples == 0) throw SizeError("sim: samples per dataset must be positive");
  std::vector<GridDataset> grid;
  for (double s : speeds) {
    for (int n : noise_levels) {
      grid.push_back({make_style(s, n), {}});
      grid.back().style.validate();
    }
  }
  std::sort(grid.begin(), grid.end(), [](const GridDataset& a, const GridDataset& b) {
    return a.style.id() < b.style.id();
  });
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i].style.id() == grid[i - 1].style.id()) throw ConfigError("sim: duplicate style " + grid[i].style.id());
  }
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& g = grid[static_cast<std::size_t>(i)];
    g.data = generate_style_dataset(cfg, g.style, samples, seed);
  }
  return grid;
}

}  // namespace playstyle
