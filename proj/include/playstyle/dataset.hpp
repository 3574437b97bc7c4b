#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace playstyle {

enum class ActionKind : std::uint8_t { kDiscrete = 0, kContinuous = 1 };

// Discrete: `size` is the number of actions. Continuous: `size` is the vector width.
struct ActionSpace {
  ActionKind kind = ActionKind::kDiscrete;
  std::uint32_t size = 0;

  static ActionSpace discrete(std::uint32_t n_actions) { return {ActionKind::kDiscrete, n_actions}; }
  static ActionSpace continuous(std::uint32_t dim) { return {ActionKind::kContinuous, dim}; }

  bool operator==(const ActionSpace&) const = default;
};

using Shape = std::vector<std::uint32_t>;

std::size_t shape_volume(const Shape& shape);

// 8-bit intensities laid out row-major over `shape` (typically frames x H x W).
struct Observation {
  Shape shape;
  std::vector<std::uint8_t> data;

  bool operator==(const Observation&) const = default;
};

// Either a discrete index or a real vector; which one is fixed by the
// dataset's ActionSpace.
using Action = std::variant<std::uint32_t, std::vector<float>>;

struct PlaySample {
  Observation observation;
  Action action;
};

// A bag of observation/action pairs recorded from one playstyle.
//
// Samples are kept in flat arrays: observations back to back, and actions
// either as one index per sample or `space.size` floats per sample. Order and
// multiplicity are preserved exactly.
class PlayDataset {
 public:
  PlayDataset() = default;
  PlayDataset(std::string id, ActionSpace space, Shape obs_shape);

  const std::string& id() const noexcept { return id_; }
  void set_id(std::string id) { id_ = std::move(id); }
  const ActionSpace& action_space() const noexcept { return space_; }
  const Shape& obs_shape() const noexcept { return obs_shape_; }
  std::size_t obs_size() const noexcept { return obs_size_; }
  std::size_t size() const noexcept { return count_; }
  bool empty() const noexcept { return count_ == 0; }

  std::span<const std::uint8_t> observation(std::size_t i) const;
  std::uint32_t discrete_action(std::size_t i) const;
  std::span<const float> continuous_action(std::size_t i) const;
  PlaySample sample(std::size_t i) const;

  // Raw storage, for bulk kernels and serialization.
  std::span<const std::uint8_t> observation_bytes() const noexcept { return observations_; }
  std::span<const std::uint32_t> action_indices() const noexcept { return indices_; }
  std::span<const float> action_values() const noexcept { return values_; }

  void reserve(std::size_t n);
  // Throws ShapeError when the observation or action does not conform.
  void add(std::span<const std::uint8_t> obs, std::uint32_t action_index);
  void add(std::span<const std::uint8_t> obs, std::span<const float> action_values);
  void add(const PlaySample& sample);
  // Appends sample i of `other`, which must share action space and shape.
  void append_from(const PlayDataset& other, std::size_t i);

  bool operator==(const PlayDataset& other) const;

 private:
  std::string id_;
  ActionSpace space_;
  Shape obs_shape_;
  std::size_t obs_size_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> observations_;
  std::vector<std::uint32_t> indices_;
  std::vector<float> values_;
};

// ".psty" recording format, little-endian:
//   "PSTY" | u16 version=1 | u8 rank | u32 dims[rank] | u8 action tag |
//   u32 action size | u64 count | records (u8 obs payload, then u32 index
//   or f32 per dim).
inline constexpr std::uint16_t kDatasetVersion = 1;

void save_dataset(const PlayDataset& ds, const std::filesystem::path& path);
PlayDataset load_dataset(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_dataset(const PlayDataset& ds);
// `id` is attached to the decoded dataset; the format carries no label.
PlayDataset decode_dataset(std::span<const std::uint8_t> bytes, std::string id = {});

// n samples drawn without replacement; a pure function of (ds, n, seed).
PlayDataset sample_subset(const PlayDataset& ds, std::size_t n, std::uint64_t seed);

}  // namespace playstyle
