#pragma once

// A small looped racing track with rule-based drivers. A driver holds a
// target speed; styles differ by that speed and by Gaussian action noise.
//
// Car state is (position along the loop, lateral offset, speed). Actions are
// (steer, accel), both nominally in [-1, 1].

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "playstyle/dataset.hpp"

namespace playstyle {

struct SimConfig {
  double track_length = 1000.0;
  double segment_length = 50.0;   // curvature is constant per segment
  double transition = 10.0;       // blend into the next segment's curvature
  std::uint64_t track_seed = 3;

  double max_speed = 150.0;
  double accel_gain = 2.5;    // speed change per unit accel per step
  double drag = 0.002;
  double speed_gain = 0.02;   // controller: accel = k (target - speed)
  double dt = 0.1;            // position advance per unit speed
  double drift = 0.004;       // lateral push per unit curvature and speed
  double steer_gain = 0.08;   // lateral response per unit steer
  double steer_k = 2.0;       // controller: steer = -k * offset

  double init_speed_min = 30.0;
  double init_speed_max = 100.0;
  double init_offset = 0.5;

  std::uint32_t bar_rows = 6;  // speed bar height in pixels
  std::uint32_t frames = 4;
  std::uint32_t height = 32;
  std::uint32_t width = 32;
  std::uint32_t episode_steps = 128;

  // Throws ConfigError on non-positive lengths or an empty render size.
  void validate() const;
  Shape obs_shape() const { return {frames, height, width}; }
};

struct StyleSpec {
  double target_speed = 60.0;
  double sigma_steer = 0.0;
  double sigma_accel = 0.0;
  int noise_level = 0;  // label only

  void validate() const;
  // "s60_n1"
  std::string id() const;
};

// Level 0 is noiseless; levels 1..5 are (0.01, 0.005) ... (0.05, 0.025).
std::pair<double, double> noise_level_sigmas(int level);
StyleSpec make_style(double speed, int noise_level);

inline const std::vector<double> kDefaultSpeeds = {60, 65, 70, 75, 80};

struct CarState {
  double position = 0;
  double offset = 0;
  double speed = 0;
};

class Track {
 public:
  explicit Track(const SimConfig& cfg);
  // Signed curvature at `position`, in {-1, 0, 1} away from segment ends.
  double curvature(double position) const;
  double length() const noexcept { return length_; }

 private:
  double length_;
  double segment_;
  double transition_;
  std::vector<int> classes_;
};

// One height x width frame: speed bar on top, road band below with the car
// fixed at the bottom centre.
std::vector<std::uint8_t> render_frame(const SimConfig& cfg, const Track& track, const CarState& car);

// Stacks the last `frames` renders, oldest first; a short history repeats
// its earliest frame.
Observation stack_frames(const SimConfig& cfg, const std::deque<std::vector<std::uint8_t>>& history);
Observation render_observation(const SimConfig& cfg, const Track& track,
                               std::deque<std::vector<std::uint8_t>>& history, const CarState& car);

// Controller output before noise.
std::pair<double, double> controller(const SimConfig& cfg, const Track& track, const StyleSpec& style,
                                     const CarState& car);
CarState step_car(const SimConfig& cfg, const Track& track, const CarState& car, double steer, double accel);

struct Episode {
  std::vector<CarState> states;  // state before each action
  PlayDataset samples;
};

Episode run_episode(const SimConfig& cfg, const StyleSpec& style, std::uint64_t seed);

struct GridDataset {
  StyleSpec style;
  PlayDataset data;
};

// One dataset per (speed, noise level), ordered by style id. Each dataset
// concatenates enough seeded episodes and subsamples to `samples`. Episode
// seeds are derived from (seed, style) so different base seeds never share
// episodes in practice.
std::vector<GridDataset> generate_style_grid(const SimConfig& cfg, const std::vector<double>& speeds,
                                             const std::vector<int>& noise_levels, std::size_t samples,
                                             std::uint64_t seed);

PlayDataset generate_style_dataset(const SimConfig& cfg, const StyleSpec& style, std::size_t samples,
                                   std::uint64_t seed);

}  // namespace playstyle
