#include "playstyle/discretizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "playstyle/errors.hpp"
#include "playstyle/hsd.hpp"

namespace playstyle {

std::uint64_t state_digest(std::span<const Symbol> code) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Symbol s : code) {
    for (int b = 0; b < 2; ++b) {
      h ^= static_cast<std::uint8_t>(s >> (8 * b));
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

DiscreteState pixel_map(std::span<const std::uint8_t> obs) {
  return DiscreteState(std::vector<Symbol>(obs.begin(), obs.end()));
}

DiscreteState pixel_map(const Observation& obs) { return pixel_map(std::span(obs.data)); }

namespace {

struct Tap {
  std::size_t lo, hi;
  double frac;
};

std::vector<Tap> taps(std::size_t in, std::size_t out) {
  std::vector<Tap> t(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t i = 0; i < out; ++i) {
    double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto lo = static_cast<std::size_t>(std::floor(src));
    t[i] = {lo, std::min(lo + 1, in - 1), src - static_cast<double>(lo)};
  }
  return t;
}

double lerp(double a, double b, double f) { return a + (b - a) * f; }

}  // namespace

Grid bilinear_resize(std::span<const std::uint8_t> image, std::size_t height, std::size_t width,
                     std::size_t out_h, std::size_t out_w) {
  if (height == 0 || width == 0 || out_h == 0 || out_w == 0) throw SizeError("bilinear_resize: empty extent");
  if (image.size() != height * width) throw ShapeError("bilinear_resize: image size does not match extent");
  const auto rows = taps(height, out_h);
  const auto cols = taps(width, out_w);
  Grid g{out_h, out_w, std::vector<double>(out_h * out_w)};
  for (std::size_t r = 0; r < out_h; ++r) {
    const auto& tr = rows[r];
    for (std::size_t c = 0; c < out_w; ++c) {
      const auto& tc = cols[c];
      const double top = lerp(image[tr.lo * width + tc.lo], image[tr.lo * width + tc.hi], tc.frac);
      const double bot = lerp(image[tr.hi * width + tc.lo], image[tr.hi * width + tc.hi], tc.frac);
      g.values[r * out_w + c] = lerp(top, bot, tr.frac);
    }
  }
  return g;
}

DiscreteState lrd_map(std::span<const std::uint8_t> obs, const Shape& shape, std::size_t out_h, std::size_t out_w,
                      std::uint32_t intensity_div) {
  if (intensity_div == 0) throw ConfigError("lrd_map: intensity divisor must be positive");
  if (shape.size() != 2 && shape.size() != 3) throw ShapeError("lrd_map: observation rank must be 2 or 3");
  if (obs.size() != shape_volume(shape)) throw ShapeError("lrd_map: observation size does not match shape");
  const std::size_t frames = shape.size() == 3 ? shape[0] : 1;
  const std::size_t h = shape[shape.size() - 2];
  const std::size_t w = shape.back();
  std::vector<Symbol> code;
  code.reserve(frames * out_h * out_w);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto g = bilinear_resize(obs.subspan(f * h * w, h * w), h, w, out_h, out_w);
    for (double v : g.values) code.push_back(static_cast<Symbol>(std::floor(v / intensity_div)));
  }
  return DiscreteState(std::move(code));
}

DiscreteState lrd_map(const Observation& obs, std::size_t out_h, std::size_t out_w, std::uint32_t intensity_div) {
  return lrd_map(obs.data, obs.shape, out_h, out_w, intensity_div);
}

Quantized quantize(std::span<const double> z_e, std::span<const double> codebook, std::size_t dim) {
  if (dim == 0 || codebook.empty() || codebook.size() % dim != 0) {
    throw ShapeError("quantize: codebook is empty or not a multiple of dim");
  }
  if (z_e.size() % dim != 0) throw ShapeError("quantize: latent size is not a multiple of dim");
  const std::size_t cells = z_e.size() / dim;
  const std::size_t k = codebook.size() / dim;
  Quantized q{std::vector<std::uint32_t>(cells), std::vector<double>(z_e.size())};
  for (std::size_t c = 0; c < cells; ++c) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < k; ++j) {
      double d = 0.0;
      for (std::size_t i = 0; i < dim; ++i) {
        const double diff = z_e[c * dim + i] - codebook[j * dim + i];
        d += diff * diff;
      }
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    q.code[c] = static_cast<std::uint32_t>(arg);
    std::copy_n(codebook.begin() + static_cast<std::ptrdiff_t>(arg * dim), dim,
                q.z_q.begin() + static_cast<std::ptrdiff_t>(c * dim));
  }
  return q;
}

namespace {

void check_hierarchy(int hierarchy) {
  if (hierarchy != 0 && hierarchy != 1) throw ConfigError("hsd: hierarchy must be 0 or 1");
}

std::vector<DiscreteState> split_codes(const std::vector<std::uint32_t>& codes, std::size_t len) {
  const std::size_t n = len ? codes.size() / len : 0;
  std::vector<DiscreteState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back(std::vector<Symbol>(codes.begin() + static_cast<std::ptrdiff_t>(i * len),
                                         codes.begin() + static_cast<std::ptrdiff_t>((i + 1) * len)));
  }
  return out;
}

}  // namespace

DiscreteState hsd_map(const HsdModel& model, const Observation& obs, int hierarchy) {
  check_hierarchy(hierarchy);
  if (obs.shape != model.config().obs_shape) throw ShapeError("hsd_map: observation shape does not match model");
  const auto codes = hsd_engine::encode<float>(model.config(), model.params(), obs.data, 1, hierarchy);
  return split_codes(codes, model.code_length(hierarchy)).front();
}

StateMapper StateMapper::pixel() { return StateMapper{}; }

StateMapper StateMapper::lrd(std::size_t out_h, std::size_t out_w, std::uint32_t intensity_div) {
  if (out_h == 0 || out_w == 0) throw SizeError("lrd: output extent must be positive");
  if (intensity_div == 0) throw ConfigError("lrd: intensity divisor must be positive");
  StateMapper m;
  m.kind_ = Kind::kLrd;
  m.out_h_ = out_h;
  m.out_w_ = out_w;
  m.div_ = intensity_div;
  return m;
}

StateMapper StateMapper::hsd(std::shared_ptr<const HsdModel> model, int hierarchy) {
  if (!model) throw ConfigError("hsd: null model");
  check_hierarchy(hierarchy);
  StateMapper m;
  m.kind_ = Kind::kHsd;
  m.model_ = std::move(model);
  m.hierarchy_ = hierarchy;
  return m;
}

std::string StateMapper::describe() const {
  switch (kind_) {
    case Kind::kPixel:
      return "pixel";
    case Kind::kLrd:
      return "lrd(" + std::to_string(out_h_) + "x" + std::to_string(out_w_) + ",/" + std::to_string(div_) + ")";
    case Kind::kHsd: {
      const auto& c = model_->config();
      const auto k = hierarchy_ == 0 ? c.codebook0 : c.codebook;
      const auto b = hierarchy_ == 0 ? c.base_cells() : c.cells;
      return "hsd(h" + std::to_string(hierarchy_) + ",K=" + std::to_string(k) + ",B=" + std::to_string(b) + ")";
    }
  }
  return {};
}

DiscreteState StateMapper::map(std::span<const std::uint8_t> obs, const Shape& shape) const {
  switch (kind_) {
    case Kind::kPixel:
      if (obs.size() != shape_volume(shape)) throw ShapeError("pixel: observation size does not match shape");
      return pixel_map(obs);
    case Kind::kLrd:
      return lrd_map(obs, shape, out_h_, out_w_, div_);
    case Kind::kHsd:
      return hsd_map(*model_, Observation{shape, {obs.begin(), obs.end()}}, hierarchy_);
  }
  return {};
}

std::vector<DiscreteState> StateMapper::map_all(const PlayDataset& ds) const {
  if (kind_ == Kind::kHsd) {
    if (ds.obs_shape() != model_->config().obs_shape) {
      throw ShapeError("hsd: dataset observation shape does not match model");
    }
    const auto codes =
        hsd_engine::encode<float>(model_->config(), model_->params(), ds.observation_bytes(), ds.size(), hierarchy_);
    return split_codes(codes, model_->code_length(hierarchy_));
  }
  std::vector<DiscreteState> out(ds.size());
  const auto n = static_cast<std::ptrdiff_t>(ds.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = map(ds.observation(static_cast<std::size_t>(i)), ds.obs_shape());
  }
  return out;
}

const StateEntry* StateTable::find(const DiscreteState& s) const {
  auto it = entries_.find(s);
  return it == entries_.end() ? nullptr : &it->second;
}

std::size_t StateTable::visits(const DiscreteState& s) const {
  const auto* e = find(s);
  return e ? e->count : 0;
}

void StateTable::add(const DiscreteState& s, const PlayDataset& ds, std::size_t i) {
  if (!(ds.action_space() == space_)) throw ShapeError("state table: action space mismatch");
  auto& e = entries_[s];
  ++e.count;
  ++total_;
  if (space_.kind == ActionKind::kDiscrete) {
    e.indices.push_back(ds.discrete_action(i));
  } else {
    const auto v = ds.continuous_action(i);
    e.values.insert(e.values.end(), v.begin(), v.end());
  }
}

void StateTable::merge(const StateTable& other) {
  if (!(other.space_ == space_)) throw ShapeError("state table: action space mismatch");
  for (const auto& [s, o] : other.entries_) {
    auto& e = entries_[s];
    e.count += o.count;
    e.indices.insert(e.indices.end(), o.indices.begin(), o.indices.end());
    e.values.insert(e.values.end(), o.values.begin(), o.values.end());
  }
  total_ += other.total_;
}

StateTable table_from_states(std::span<const DiscreteState> states, const PlayDataset& ds) {
  if (states.size() != ds.size()) throw SizeError("table_from_states: one state per sample required");
  StateTable t(ds.action_space());
  for (std::size_t i = 0; i < ds.size(); ++i) t.add(states[i], ds, i);
  return t;
}

StateTable table_from_states(std::span<const DiscreteState> states, const PlayDataset& ds,
                             std::span<const std::size_t> subset) {
  if (states.size() != ds.size()) throw SizeError("table_from_states: one state per sample required");
  StateTable t(ds.action_space());
  for (auto i : subset) {
    if (i >= ds.size()) throw SizeError("table_from_states: subset index out of range");
    t.add(states[i], ds, i);
  }
  return t;
}

StateTable build_state_table(const StateMapper& mapper, const PlayDataset& ds) {
  if (mapper.kind() == StateMapper::Kind::kHsd) return table_from_states(mapper.map_all(ds), ds);
  const std::size_t n = ds.size();
  const auto chunks = static_cast<std::size_t>(std::max(1, omp_get_max_threads()));
  std::vector<StateTable> parts(chunks, StateTable(ds.action_space()));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(chunks); ++c) {
    const std::size_t lo = n * static_cast<std::size_t>(c) / chunks;
    const std::size_t hi = n * static_cast<std::size_t>(c + 1) / chunks;
    auto& part = parts[static_cast<std::size_t>(c)];
    for (std::size_t i = lo; i < hi; ++i) part.add(mapper.map(ds.observation(i), ds.obs_shape()), ds, i);
  }
  StateTable t(ds.action_space());
  for (const auto& p : parts) t.merge(p);
  return t;
}

namespace serial {

StateTable build_state_table(const StateMapper& mapper, const PlayDataset& ds) {
  StateTable t(ds.action_space());
  for (std::size_t i = 0; i < ds.size(); ++i) t.add(mapper.map(ds.observation(i), ds.obs_shape()), ds, i);
  return t;
}

}  // namespace serial

}  // namespace playstyle
