#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "playstyle/errors.hpp"
#include "playstyle/sim.hpp"

namespace playstyle {
namespace {

double variance(const std::vector<double>& v) {
  double m = 0, s = 0;
  for (double x : v) m += x;
  m /= double(v.size());
  for (double x : v) s += (x - m) * (x - m);
  return s / double(v.size());
}

TEST(Style, NoiseLevelsAndIds) {
  EXPECT_EQ(noise_level_sigmas(0), std::make_pair(0.0, 0.0));
  const auto [s1, a1] = noise_level_sigmas(1);
  EXPECT_DOUBLE_EQ(s1, 0.01);
  EXPECT_DOUBLE_EQ(a1, 0.005);
  const auto [s2, a2] = noise_level_sigmas(2);
  EXPECT_DOUBLE_EQ(s2, 0.02);
  EXPECT_DOUBLE_EQ(a2, 0.01);
  const auto [s5, a5] = noise_level_sigmas(5);
  EXPECT_DOUBLE_EQ(s5, 0.05);
  EXPECT_DOUBLE_EQ(a5, 0.025);
  EXPECT_THROW(noise_level_sigmas(6), ConfigError);
  EXPECT_EQ(make_style(60, 1).id(), "s60_n1");
  EXPECT_EQ(make_style(62.5, 0).id(), "s62.5_n0");
  StyleSpec bad;
  bad.target_speed = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = make_style(60, 1);
  bad.sigma_accel = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Config, Validation) {
  SimConfig c;
  c.validate();
  EXPECT_EQ(c.obs_shape(), (Shape{4, 32, 32}));
  auto bad = c;
  bad.track_length = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.episode_steps = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.bar_rows = 30;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Track, CurvatureClasses) {
  const SimConfig c;
  const Track t(c);
  std::set<int> seen;
  for (double p = 0; p < c.track_length; p += 1.0) {
    const double k = t.curvature(p);
    EXPECT_GE(k, -1.0);
    EXPECT_LE(k, 1.0);
    const double in_segment = std::fmod(p, c.segment_length);
    if (in_segment < c.segment_length - c.transition) {
      EXPECT_EQ(k, std::round(k)) << p;
      seen.insert(static_cast<int>(k));
    }
  }
  EXPECT_EQ(seen.size(), 3u);
  EXPECT_EQ(t.curvature(c.track_length + 5), t.curvature(5));
}

TEST(Episode, Deterministic) {
  const SimConfig c;
  const auto a = run_episode(c, make_style(70, 3), 11);
  const auto b = run_episode(c, make_style(70, 3), 11);
  const auto d = run_episode(c, make_style(70, 3), 12);
  EXPECT_TRUE(a.samples == b.samples);
  EXPECT_FALSE(a.samples == d.samples);
  EXPECT_EQ(a.samples.size(), c.episode_steps);
  EXPECT_EQ(a.samples.action_space(), ActionSpace::continuous(2));
  for (float v : a.samples.action_values()) EXPECT_TRUE(std::isfinite(v));
}

TEST(Episode, SpeedConvergesWithoutNoise) {
  SimConfig c;
  c.episode_steps = 400;
  for (double s : kDefaultSpeeds) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto ep = run_episode(c, make_style(s, 0), seed);
      for (std::size_t t = 300; t < ep.states.size(); ++t) {
        EXPECT_LE(std::abs(ep.states[t].speed - s), 0.05 * s) << s << " step " << t;
      }
    }
  }
}

TEST(Episode, HigherNoiseLevelHasHigherActionVariance) {
  SimConfig c;
  c.episode_steps = 300;
  std::vector<double> steer1, accel1, steer5, accel5;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto a = run_episode(c, make_style(70, 1), seed);
    const auto b = run_episode(c, make_style(70, 5), seed);
    for (std::size_t t = 150; t < c.episode_steps; ++t) {
      steer1.push_back(a.samples.continuous_action(t)[0]);
      accel1.push_back(a.samples.continuous_action(t)[1]);
      steer5.push_back(b.samples.continuous_action(t)[0]);
      accel5.push_back(b.samples.continuous_action(t)[1]);
    }
  }
  EXPECT_GT(variance(steer5), variance(steer1));
  EXPECT_GT(variance(accel5), variance(accel1));
}

TEST(Episode, BurnInAccelOrdersBySpeed) {
  const SimConfig c;
  std::vector<double> means;
  for (double s : kDefaultSpeeds) {
    double sum = 0;
    std::size_t n = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const auto ep = run_episode(c, make_style(s, 0), seed);
      for (std::size_t t = 0; t < 40; ++t, ++n) sum += ep.samples.continuous_action(t)[1];
    }
    means.push_back(sum / double(n));
  }
  for (std::size_t i = 1; i < means.size(); ++i) EXPECT_GT(means[i], means[i - 1]);
}

TEST(Render, SameStateSamePixels) {
  const SimConfig c;
  const Track t(c);
  const CarState car{123.4, 0.3, 66};
  EXPECT_EQ(render_frame(c, t, car), render_frame(c, t, car));
  for (auto v : render_frame(c, t, car)) EXPECT_LE(v, 255);
}

TEST(Render, SpeedOnlyChangesTheBar) {
  const SimConfig c;
  const Track t(c);
  int changed = 0;
  for (double speed : {0.0, 10.0, 61.3, 80.0, 149.0}) {
    const auto a = render_frame(c, t, {250.0, -0.2, 65.0});
    const auto b = render_frame(c, t, {250.0, -0.2, speed});
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] != b[i]) {
        EXPECT_LT(i / c.width, c.bar_rows) << "pixel " << i;
        ++changed;
      }
    }
  }
  EXPECT_GT(changed, 0);
}

TEST(Render, PositionAndOffsetMoveTheRoad) {
  const SimConfig c;
  const Track t(c);
  const auto a = render_frame(c, t, {250.0, 0.0, 65.0});
  const auto b = render_frame(c, t, {250.0, 0.8, 65.0});
  EXPECT_NE(a, b);
  for (std::size_t i = 0; i < c.bar_rows * c.width; ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Render, ShortHistoryRepeatsEarliestFrame) {
  const SimConfig c;
  const Track t(c);
  const std::size_t frame = c.height * c.width;
  std::deque<std::vector<std::uint8_t>> history;
  const auto o1 = render_observation(c, t, history, {10, 0, 50});
  ASSERT_EQ(o1.data.size(), 4 * frame);
  const std::vector<std::uint8_t> f0(o1.data.begin(), o1.data.begin() + frame);
  for (std::size_t f = 1; f < 4; ++f) {
    EXPECT_TRUE(std::equal(f0.begin(), f0.end(), o1.data.begin() + f * frame));
  }
  const auto o2 = render_observation(c, t, history, {15, 0.1, 90});
  const auto f1 = render_frame(c, t, {15, 0.1, 90});
  for (std::size_t f = 0; f < 3; ++f) EXPECT_TRUE(std::equal(f0.begin(), f0.end(), o2.data.begin() + f * frame));
  EXPECT_TRUE(std::equal(f1.begin(), f1.end(), o2.data.begin() + 3 * frame));
  for (int i = 0; i < 5; ++i) render_observation(c, t, history, {20.0 + i, 0, 50});
  EXPECT_EQ(history.size(), 4u);
  EXPECT_THROW(stack_frames(c, {}), StateError);
}

TEST(Grid, ShapeOrderAndDeterminism) {
  SimConfig c;
  const auto g = generate_style_grid(c, kDefaultSpeeds, {1, 2, 3, 4, 5}, 1024, 7);
  ASSERT_EQ(g.size(), 25u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_EQ(g[i].data.size(), 1024u);
    EXPECT_EQ(g[i].data.id(), g[i].style.id());
    if (i) {
      EXPECT_LT(g[i - 1].style.id(), g[i].style.id());
    }
  }
  const auto again = generate_style_grid(c, {60}, {3}, 1024, 7);
  const auto it = std::find_if(g.begin(), g.end(), [](const auto& x) { return x.style.id() == "s60_n3"; });
  ASSERT_NE(it, g.end());
  EXPECT_TRUE(again[0].data == it->data);
  EXPECT_THROW(generate_style_grid(c, {}, {1}, 10, 7), ConfigError);
  EXPECT_THROW(generate_style_grid(c, {60, 60}, {1}, 10, 7), ConfigError);
  EXPECT_THROW(generate_style_grid(c, {60}, {1}, 0, 7), SizeError);
  EXPECT_THROW(generate_style_dataset(c, make_style(60, 1), 0, 7), SizeError);
}

TEST(Grid, DisjointSeedsShareNoSamples) {
  const SimConfig c;
  const auto a = generate_style_dataset(c, make_style(70, 1), 1024, 7);
  const auto b = generate_style_dataset(c, make_style(70, 1), 1024, 1000);
  std::set<std::vector<std::uint8_t>> seen;
  auto key = [](const PlayDataset& d, std::size_t i) {
    std::vector<std::uint8_t> k(d.observation(i).begin(), d.observation(i).end());
    const auto act = d.continuous_action(i);
    const auto* p = reinterpret_cast<const std::uint8_t*>(act.data());
    k.insert(k.end(), p, p + act.size_bytes());
    return k;
  };
  for (std::size_t i = 0; i < a.size(); ++i) seen.insert(key(a, i));
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_FALSE(seen.count(key(b, i)));
}

}  // namespace
}  // namespace playstyle
