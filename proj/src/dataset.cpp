#include "playstyle/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include "playstyle/errors.hpp"

namespace playstyle {

static_assert(std::endian::native == std::endian::little,
              "recording I/O assumes a little-endian host");

namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'S', 'T', 'Y'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }

  template <typename T>
  T get() {
    if (!has(sizeof(T))) throw FormatError("psty: header truncated");
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t shape_volume(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t b) { return a * b; });
}

PlayDataset::PlayDataset(std::string id, ActionSpace space, Shape obs_shape)
    : id_(std::move(id)),
      space_(space),
      obs_shape_(std::move(obs_shape)),
      obs_size_(shape_volume(obs_shape_)) {}

std::span<const std::uint8_t> PlayDataset::observation(std::size_t i) const {
  return std::span<const std::uint8_t>(observations_).subspan(i * obs_size_, obs_size_);
}

std::uint32_t PlayDataset::discrete_action(std::size_t i) const {
  if (space_.kind != ActionKind::kDiscrete) throw ShapeError("dataset actions are continuous");
  return indices_.at(i);
}

std::span<const float> PlayDataset::continuous_action(std::size_t i) const {
  if (space_.kind != ActionKind::kContinuous) throw ShapeError("dataset actions are discrete");
  return std::span<const float>(values_).subspan(i * space_.size, space_.size);
}

PlaySample PlayDataset::sample(std::size_t i) const {
  if (i >= count_) throw SizeError("sample index out of range");
  PlaySample s;
  auto obs = observation(i);
  s.observation = Observation{obs_shape_, {obs.begin(), obs.end()}};
  if (space_.kind == ActionKind::kDiscrete) {
    s.action = indices_[i];
  } else {
    auto v = continuous_action(i);
    s.action = std::vector<float>(v.begin(), v.end());
  }
  return s;
}

void PlayDataset::reserve(std::size_t n) {
  observations_.reserve(n * obs_size_);
  if (space_.kind == ActionKind::kDiscrete) {
    indices_.reserve(n);
  } else {
    values_.reserve(n * space_.size);
  }
}

void PlayDataset::add(std::span<const std::uint8_t> obs, std::uint32_t action_index) {
  if (space_.kind != ActionKind::kDiscrete) throw ShapeError("discrete action for continuous dataset");
  if (obs.size() != obs_size_) throw ShapeError("observation size does not match dataset shape");
  if (action_index >= space_.size) throw ShapeError("action index out of range");
  observations_.insert(observations_.end(), obs.begin(), obs.end());
  indices_.push_back(action_index);
  ++count_;
}

void PlayDataset::add(std::span<const std::uint8_t> obs, std::span<const float> action_values) {
  if (space_.kind != ActionKind::kContinuous) throw ShapeError("continuous action for discrete dataset");
  if (obs.size() != obs_size_) throw ShapeError("observation size does not match dataset shape");
  if (action_values.size() != space_.size) throw ShapeError("action dimension mismatch");
  observations_.insert(observations_.end(), obs.begin(), obs.end());
  values_.insert(values_.end(), action_values.begin(), action_values.end());
  ++count_;
}

void PlayDataset::add(const PlaySample& sample) {
  if (sample.observation.shape != obs_shape_) throw ShapeError("observation shape mismatch");
  if (const auto* idx = std::get_if<std::uint32_t>(&sample.action)) {
    add(sample.observation.data, *idx);
  } else {
    add(sample.observation.data, std::get<std::vector<float>>(sample.action));
  }
}

void PlayDataset::append_from(const PlayDataset& other, std::size_t i) {
  if (other.space_ != space_ || other.obs_shape_ != obs_shape_) {
    throw ShapeError("append_from: incompatible datasets");
  }
  if (space_.kind == ActionKind::kDiscrete) {
    add(other.observation(i), other.indices_[i]);
  } else {
    add(other.observation(i), other.continuous_action(i));
  }
}

bool PlayDataset::operator==(const PlayDataset& other) const {
  return space_ == other.space_ && obs_shape_ == other.obs_shape_ && count_ == other.count_ &&
         observations_ == other.observations_ && indices_ == other.indices_ &&
         values_ == other.values_;
}

std::vector<std::uint8_t> encode_dataset(const PlayDataset& ds) {
  const auto& shape = ds.obs_shape();
  if (shape.size() > 255) throw ShapeError("psty: observation rank above 255");
  const auto space = ds.action_space();
  const std::size_t action_bytes =
      space.kind == ActionKind::kDiscrete ? sizeof(std::uint32_t) : sizeof(float) * space.size;

  std::vector<std::uint8_t> out;
  out.reserve(4 + 2 + 1 + 4 * shape.size() + 1 + 4 + 8 + ds.size() * (ds.obs_size() + action_bytes));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put<std::uint16_t>(out, kDatasetVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(shape.size()));
  for (auto d : shape) put<std::uint32_t>(out, d);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(space.kind));
  put<std::uint32_t>(out, space.size);
  put<std::uint64_t>(out, ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    auto obs = ds.observation(i);
    out.insert(out.end(), obs.begin(), obs.end());
    if (space.kind == ActionKind::kDiscrete) {
      put<std::uint32_t>(out, ds.discrete_action(i));
    } else {
      for (float v : ds.continuous_action(i)) put<float>(out, v);
    }
  }
  return out;
}

PlayDataset decode_dataset(std::span<const std::uint8_t> bytes, std::string id) {
  Reader in(bytes);
  if (!in.has(4) || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FormatError("psty: bad magic");
  }
  in.take(4);
  const auto version = in.get<std::uint16_t>();
  if (version != kDatasetVersion) {
    throw FormatError("psty: unsupported version " + std::to_string(version));
  }
  const auto rank = in.get<std::uint8_t>();
  Shape shape(rank);
  for (auto& d : shape) d = in.get<std::uint32_t>();
  const auto tag = in.get<std::uint8_t>();
  if (tag > 1) throw FormatError("psty: unknown action tag " + std::to_string(tag));
  const auto size = in.get<std::uint32_t>();
  const auto count = in.get<std::uint64_t>();

  ActionSpace space{static_cast<ActionKind>(tag), size};
  PlayDataset ds(std::move(id), space, shape);
  const std::size_t obs_size = ds.obs_size();
  const std::size_t action_bytes =
      space.kind == ActionKind::kDiscrete ? sizeof(std::uint32_t) : sizeof(float) * size;
  const std::size_t record_bytes = obs_size + action_bytes;
  if (record_bytes != 0 && in.remaining() / record_bytes < count) {
    throw CorruptionError("psty: truncated records", in.remaining() / record_bytes);
  }
  ds.reserve(count);

  std::vector<float> action(space.kind == ActionKind::kContinuous ? size : 0);
  for (std::uint64_t r = 0; r < count; ++r) {
    auto obs = in.take(obs_size);
    try {
      if (space.kind == ActionKind::kDiscrete) {
        ds.add(obs, in.get<std::uint32_t>());
      } else {
        for (auto& v : action) v = in.get<float>();
        ds.add(obs, action);
      }
    } catch (const ShapeError& e) {
      throw CorruptionError(std::string("psty: invalid record: ") + e.what(), r);
    }
  }
  if (in.remaining() != 0) throw FormatError("psty: trailing bytes after declared records");
  return ds;
}

void save_dataset(const PlayDataset& ds, const std::filesystem::path& path) {
  const auto bytes = encode_dataset(ds);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

PlayDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_dataset(bytes, path.stem().string());
  } catch (const CorruptionError& e) {
    throw CorruptionError(path.string() + ": " + e.what(), e.record());
  }
}

PlayDataset sample_subset(const PlayDataset& ds, std::size_t n, std::uint64_t seed) {
  if (n > ds.size()) {
    throw SizeError("sample_subset: requested " + std::to_string(n) + " of " +
                    std::to_string(ds.size()) + " samples");
  }
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: only the first n slots are needed.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  PlayDataset out(ds.id(), ds.action_space(), ds.obs_shape());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.append_from(ds, order[i]);
  return out;
}

}  // namespace playstyle
