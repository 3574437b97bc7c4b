#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "playstyle/dataset.hpp"

namespace playstyle {

class HsdModel;

using Symbol = std::uint16_t;

// 64-bit FNV-1a over the little-endian bytes of the symbols.
std::uint64_t state_digest(std::span<const Symbol> code);

// A discrete state: an ordered group of symbols. The digest is only a
// bucket key; equality always compares the full code.
class DiscreteState {
 public:
  DiscreteState() : hash_(state_digest({})) {}
  explicit DiscreteState(std::vector<Symbol> code) : code_(std::move(code)), hash_(state_digest(code_)) {}

  const std::vector<Symbol>& code() const noexcept { return code_; }
  std::uint64_t hash() const noexcept { return hash_; }
  std::size_t size() const noexcept { return code_.size(); }

  bool operator==(const DiscreteState& o) const { return hash_ == o.hash_ && code_ == o.code_; }
  // Total order used wherever iteration order must be reproducible.
  bool operator<(const DiscreteState& o) const {
    return hash_ != o.hash_ ? hash_ < o.hash_ : code_ < o.code_;
  }

 private:
  std::vector<Symbol> code_;
  std::uint64_t hash_;
};

struct DiscreteStateHash {
  std::size_t operator()(const DiscreteState& s) const noexcept { return static_cast<std::size_t>(s.hash()); }
};

// Row-major grid of reals.
struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> values;

  double at(std::size_t r, std::size_t c) const { return values[r * width + c]; }
};

// Identity mapping: the flattened bytes become the code.
DiscreteState pixel_map(std::span<const std::uint8_t> obs);
DiscreteState pixel_map(const Observation& obs);

// Bilinear interpolation with half-pixel centres: output pixel (r, c) samples
// the input at ((r + 0.5) * H / out_h - 0.5, (c + 0.5) * W / out_w - 0.5),
// clamped to the input extent. Throws SizeError on empty input or zero output.
Grid bilinear_resize(std::span<const std::uint8_t> image, std::size_t height, std::size_t width,
                     std::size_t out_h, std::size_t out_w);

// Resizes each frame to out_h x out_w, floor-divides by `intensity_div` and
// concatenates frames. Observations of rank 2 are a single frame; rank 3 is
// (frames, H, W).
DiscreteState lrd_map(std::span<const std::uint8_t> obs, const Shape& shape, std::size_t out_h,
                      std::size_t out_w, std::uint32_t intensity_div);
DiscreteState lrd_map(const Observation& obs, std::size_t out_h, std::size_t out_w,
                      std::uint32_t intensity_div);

struct Quantized {
  std::vector<std::uint32_t> code;
  std::vector<double> z_q;
};

// Nearest-neighbour vector quantization of `z_e` (cells x dim, row-major)
// against `codebook` (K x dim). Ties go to the lowest codebook index.
Quantized quantize(std::span<const double> z_e, std::span<const double> codebook, std::size_t dim);

// Runs the encoders up to `hierarchy` (0 = base, 1 = top) and returns that
// hierarchy's code. Never samples alpha or noise.
DiscreteState hsd_map(const HsdModel& model, const Observation& obs, int hierarchy);

class StateMapper {
 public:
  enum class Kind { kPixel, kLrd, kHsd };

  static StateMapper pixel();
  static StateMapper lrd(std::size_t out_h = 8, std::size_t out_w = 8, std::uint32_t intensity_div = 16);
  static StateMapper hsd(std::shared_ptr<const HsdModel> model, int hierarchy = 1);

  Kind kind() const noexcept { return kind_; }
  std::string describe() const;

  DiscreteState map(std::span<const std::uint8_t> obs, const Shape& shape) const;
  // Maps every observation of `ds`, in order. Parallel over samples.
  std::vector<DiscreteState> map_all(const PlayDataset& ds) const;

 private:
  Kind kind_ = Kind::kPixel;
  std::size_t out_h_ = 8;
  std::size_t out_w_ = 8;
  std::uint32_t div_ = 16;
  std::shared_ptr<const HsdModel> model_;
  int hierarchy_ = 1;
};

// Visit count F(s, X) and the actions observed at s, in sample order.
struct StateEntry {
  std::size_t count = 0;
  std::vector<std::uint32_t> indices;  // discrete action spaces
  std::vector<float> values;           // continuous: count * dim floats

  bool operator==(const StateEntry&) const = default;
};

class StateTable {
 public:
  using Map = std::unordered_map<DiscreteState, StateEntry, DiscreteStateHash>;

  StateTable() = default;
  explicit StateTable(ActionSpace space) : space_(space) {}

  const ActionSpace& action_space() const noexcept { return space_; }
  std::size_t total() const noexcept { return total_; }
  std::size_t num_states() const noexcept { return entries_.size(); }
  const Map& entries() const noexcept { return entries_; }

  const StateEntry* find(const DiscreteState& s) const;
  std::size_t visits(const DiscreteState& s) const;

  // Records sample i of `ds` at state s.
  void add(const DiscreteState& s, const PlayDataset& ds, std::size_t i);
  // Pointwise count addition and action-multiset concatenation.
  void merge(const StateTable& other);

  bool operator==(const StateTable& o) const {
    return space_ == o.space_ && total_ == o.total_ && entries_ == o.entries_;
  }

 private:
  ActionSpace space_;
  std::size_t total_ = 0;
  Map entries_;
};

// Table from states already computed for each sample of `ds`
// (states.size() == ds.size()). Optional `subset` restricts to those samples.
StateTable table_from_states(std::span<const DiscreteState> states, const PlayDataset& ds);
StateTable table_from_states(std::span<const DiscreteState> states, const PlayDataset& ds,
                             std::span<const std::size_t> subset);

// Parallel build: chunks of the dataset go to workers, partial tables are
// merged in chunk order, so the result equals the serial build exactly.
StateTable build_state_table(const StateMapper& mapper, const PlayDataset& ds);

namespace serial {
StateTable build_state_table(const StateMapper& mapper, const PlayDataset& ds);
}

}  // namespace playstyle
