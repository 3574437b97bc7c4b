#include "playstyle/hsd.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "playstyle/errors.hpp"

namespace playstyle {

static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

std::uint32_t HsdConfig::frames() const { return obs_shape.size() == 3 ? obs_shape[0] : 1; }

std::uint32_t HsdConfig::base_cells() const {
  const auto h = obs_shape[obs_shape.size() - 2];
  const auto w = obs_shape.back();
  return (h / patch) * (w / patch);
}

std::uint32_t HsdConfig::patch_size() const { return frames() * patch * patch; }
std::uint32_t HsdConfig::base_width() const { return base_cells() * cell_dim0; }
std::uint32_t HsdConfig::cell_dim1() const { return cells ? latent_width / cells : 0; }
std::uint32_t HsdConfig::policy_outputs() const { return action_space.size; }

void HsdConfig::validate() const {
  if (obs_shape.size() != 2 && obs_shape.size() != 3) throw ConfigError("hsd: observation rank must be 2 or 3");
  if (patch == 0) throw ConfigError("hsd: patch must be positive");
  const auto h = obs_shape[obs_shape.size() - 2];
  const auto w = obs_shape.back();
  if (h == 0 || w == 0 || h % patch != 0 || w % patch != 0) {
    throw ConfigError("hsd: observation height/width must be positive multiples of the patch size");
  }
  if (cells == 0 || codebook == 0 || codebook0 == 0) throw ConfigError("hsd: K and B must be at least 1");
  if (latent_width == 0 || latent_width % cells != 0) {
    throw ConfigError("hsd: latent width " + std::to_string(latent_width) + " is not divisible by B=" +
                      std::to_string(cells));
  }
  if (cell_dim0 == 0 || enc0_hidden == 0 || fc_hidden == 0 || dec_hidden == 0 || rec_hidden == 0 ||
      policy_hidden == 0) {
    throw ConfigError("hsd: layer widths must be positive");
  }
  if (!(beta > 0.0)) throw ConfigError("hsd: beta must be positive");
  if (!(huber_delta > 0.0)) throw ConfigError("hsd: huber delta must be positive");
  if (action_space.size == 0) throw ConfigError("hsd: empty action space");
  if (batch_size == 0) throw ConfigError("hsd: batch size must be positive");
  if (codebook > 65536 || codebook0 > 65536) throw ConfigError("hsd: codebooks larger than 65536 entries");
}

std::size_t HsdModel::code_length(int hierarchy) const {
  return hierarchy == 0 ? config_.base_cells() : config_.cells;
}

std::size_t HsdModel::alphabet(int hierarchy) const {
  return hierarchy == 0 ? config_.codebook0 : config_.codebook;
}

HsdModel init_model(const HsdConfig& cfg) {
  return HsdModel(cfg, hsd_engine::init_params<float>(cfg));
}

ForwardTrace<float> forward(const HsdModel& model, const PlayDataset& ds, std::span<const std::size_t> batch,
                            double alpha, bool train_noise, std::uint64_t noise_seed) {
  return hsd_engine::forward<float>(model.config(), model.params(), ds, batch, static_cast<float>(alpha),
                                    train_noise, noise_seed);
}

HsdParams<float> backward(const HsdModel& model, const ForwardTrace<float>& trace,
                          std::span<const std::size_t> batch) {
  return hsd_engine::backward<float>(model.config(), model.params(), trace, batch);
}

namespace {

class Adam {
 public:
  Adam(const HsdParams<float>& like, double lr) : lr_(lr) {
    like.for_each([&](const std::string& name, Component, const std::vector<std::uint32_t>&,
                      std::span<const float> t) {
      names_.push_back(name);
      m_.emplace_back(t.size(), 0.0f);
      v_.emplace_back(t.size(), 0.0f);
    });
  }

  // Forgets the moments of `count` entries of tensor `name` from `offset`.
  void reset(const std::string& name, std::size_t offset, std::size_t count) {
    const auto idx = static_cast<std::size_t>(std::find(names_.begin(), names_.end(), name) - names_.begin());
    std::fill_n(m_[idx].begin() + static_cast<std::ptrdiff_t>(offset), count, 0.0f);
    std::fill_n(v_[idx].begin() + static_cast<std::ptrdiff_t>(offset), count, 0.0f);
  }

  void step(HsdParams<float>& params, HsdParams<float>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    const float step = static_cast<float>(lr_ * std::sqrt(c2) / c1);
    std::vector<std::span<float>> gs;
    grads.for_each([&](const std::string&, Component, const std::vector<std::uint32_t>&, std::span<float> g) {
      gs.push_back(g);
    });
    std::size_t idx = 0;
    params.for_each([&](const std::string&, Component, const std::vector<std::uint32_t>&, std::span<float> p) {
      auto g = gs[idx];
      auto& m = m_[idx];
      auto& v = v_[idx];
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = static_cast<float>(kBeta1) * m[i] + static_cast<float>(1.0 - kBeta1) * g[i];
        v[i] = static_cast<float>(kBeta2) * v[i] + static_cast<float>(1.0 - kBeta2) * g[i] * g[i];
        p[i] -= step * m[i] / (std::sqrt(v[i]) + kEps);
      }
      ++idx;
    });
    ++params.version;
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr float kEps = 1e-8f;
  double lr_;
  std::uint64_t t_ = 0;
  std::vector<std::string> names_;
  std::vector<std::vector<float>> m_;
  std::vector<std::vector<float>> v_;
};

// Tracks when each code was last selected and re-seeds codes that have sat
// idle for `window` steps.
class DeadCodes {
 public:
  DeadCodes(std::string name, std::size_t entries, std::uint32_t window)
      : name_(std::move(name)), last_(entries, 0), window_(window) {}

  void update(std::size_t step, const std::vector<std::uint32_t>& codes, const std::vector<float>& z_e,
              CodebookParams<float>& book, Adam& optimizer, std::mt19937_64& rng) {
    if (window_ == 0 || codes.empty()) return;
    for (auto c : codes) last_[c] = step;
    std::uniform_int_distribution<std::size_t> pick(0, codes.size() - 1);
    for (std::size_t j = 0; j < last_.size(); ++j) {
      if (step - last_[j] < window_) continue;
      const std::size_t src = pick(rng);
      std::copy_n(z_e.begin() + static_cast<std::ptrdiff_t>(src * book.dim), book.dim,
                  book.rows.begin() + static_cast<std::ptrdiff_t>(j * book.dim));
      optimizer.reset(name_, j * book.dim, book.dim);
      last_[j] = step;
    }
  }

 private:
  std::string name_;
  std::vector<std::size_t> last_;
  std::uint32_t window_;
};

}  // namespace

TrainResult train(HsdModel model, const PlayDataset& ds, const TrainProgress& progress) {
  const HsdConfig cfg = model.config();
  cfg.validate();
  if (ds.obs_shape() != cfg.obs_shape || !(ds.action_space() == cfg.action_space)) {
    throw ShapeError("hsd train: dataset does not match the model configuration");
  }
  TrainResult result{std::move(model), {}};
  if (cfg.epochs == 0 || ds.empty()) return result;

  HsdParams<float>& params = result.model.mutable_params();
  Adam optimizer(params, cfg.learn_rate);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DeadCodes dead0("embed0", cfg.codebook0, cfg.restart_window);
  DeadCodes dead1("embed1", cfg.codebook, cfg.restart_window);

  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;
  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::span<const std::size_t> batch(order.data() + start, end - start);
      const float alpha = static_cast<float>(unit(rng));
      const std::uint64_t noise_seed = rng();
      auto trace = hsd_engine::forward<float>(cfg, params, ds, batch, alpha, true, noise_seed);
      LossRecord rec{step, trace.l_rec, trace.l_vq0, trace.l_vq1, trace.l_pi};
      if (!std::isfinite(rec.l_rec) || !std::isfinite(rec.l_vq0) || !std::isfinite(rec.l_vq1) ||
          !std::isfinite(rec.l_pi)) {
        throw TrainingError("hsd train: non-finite loss", step);
      }
      auto grads = hsd_engine::backward<float>(cfg, params, trace, batch);
      optimizer.step(params, grads);
      dead0.update(step, trace.codes0, trace.z_e0, params.embed0, optimizer, rng);
      dead1.update(step, trace.codes1, trace.z_e1, params.embed1, optimizer, rng);
      result.curve.push_back(rec);
      if (progress) progress(rec);
      ++step;
    }
  }
  return result;
}

std::size_t codebook_usage(const HsdModel& model, const PlayDataset& ds, int hierarchy) {
  if (ds.empty()) return 0;
  if (ds.obs_shape() != model.config().obs_shape) throw ShapeError("codebook_usage: observation shape mismatch");
  const auto codes = hsd_engine::encode<float>(model.config(), model.params(), ds.observation_bytes(), ds.size(),
                                               hierarchy);
  const std::size_t len = model.code_length(hierarchy);
  std::set<std::vector<std::uint32_t>> distinct;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    distinct.emplace(codes.begin() + static_cast<std::ptrdiff_t>(i * len),
                     codes.begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
  }
  return distinct.size();
}

// ---------------------------------------------------------------------------
// Model container

namespace {

constexpr char kModelMagic[4] = {'H', 'S', 'D', 'M'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
  out.insert(out.end(), p, p + sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}
  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw FormatError("hsdm: unexpected end of file");
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw FormatError("hsdm: unexpected end of file");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> encode_config(const HsdConfig& c) {
  std::vector<std::uint8_t> out;
  put<std::uint8_t>(out, static_cast<std::uint8_t>(c.obs_shape.size()));
  for (auto d : c.obs_shape) put<std::uint32_t>(out, d);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(c.action_space.kind));
  put<std::uint32_t>(out, c.action_space.size);
  for (auto v : {c.patch, c.enc0_hidden, c.cell_dim0, c.codebook0, c.fc_hidden, c.latent_width, c.cells, c.codebook,
                 c.dec_hidden, c.rec_hidden, c.policy_hidden, c.batch_size, c.epochs, c.restart_window}) {
    put<std::uint32_t>(out, v);
  }
  put<std::uint64_t>(out, c.seed);
  for (auto v : {c.beta, c.huber_delta, c.learn_rate, c.pixel_noise, c.embed_init_std}) put<double>(out, v);
  return out;
}

HsdConfig decode_config(Reader& in) {
  HsdConfig c;
  c.obs_shape.resize(in.get<std::uint8_t>());
  for (auto& d : c.obs_shape) d = in.get<std::uint32_t>();
  const auto tag = in.get<std::uint8_t>();
  if (tag > 1) throw FormatError("hsdm: unknown action tag");
  c.action_space = {static_cast<ActionKind>(tag), in.get<std::uint32_t>()};
  for (auto* v : {&c.patch, &c.enc0_hidden, &c.cell_dim0, &c.codebook0, &c.fc_hidden, &c.latent_width, &c.cells,
                  &c.codebook, &c.dec_hidden, &c.rec_hidden, &c.policy_hidden, &c.batch_size, &c.epochs,
                  &c.restart_window}) {
    *v = in.get<std::uint32_t>();
  }
  c.seed = in.get<std::uint64_t>();
  for (auto* v : {&c.beta, &c.huber_delta, &c.learn_rate, &c.pixel_noise, &c.embed_init_std}) *v = in.get<double>();
  return c;
}

}  // namespace

std::vector<std::uint8_t> encode_model(const HsdModel& model) {
  std::vector<std::uint8_t> out(std::begin(kModelMagic), std::end(kModelMagic));
  put<std::uint16_t>(out, kModelVersion);
  const auto cfg = encode_config(model.config());
  put<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
  out.insert(out.end(), cfg.begin(), cfg.end());

  std::uint32_t count = 0;
  model.params().for_each([&](const std::string&, Component, const std::vector<std::uint32_t>&,
                              std::span<const float>) { ++count; });
  put<std::uint32_t>(out, count);
  model.params().for_each([&](const std::string& name, Component, const std::vector<std::uint32_t>& dims,
                              std::span<const float> data) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put<std::uint8_t>(out, static_cast<std::uint8_t>(dims.size()));
    for (auto d : dims) put<std::uint32_t>(out, d);
    for (float v : data) put<float>(out, v);
  });
  return out;
}

HsdModel decode_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kModelMagic, 4) != 0) throw FormatError("hsdm: bad magic");
  Reader in(bytes.subspan(4));
  const auto version = in.get<std::uint16_t>();
  if (version != kModelVersion) throw FormatError("hsdm: unsupported version " + std::to_string(version));
  const auto cfg_len = in.get<std::uint32_t>();
  const auto cfg_start = in.pos();
  HsdConfig cfg = decode_config(in);
  if (in.pos() - cfg_start != cfg_len) throw FormatError("hsdm: config block length mismatch");
  cfg.validate();

  // Shapes come from the config; the file must supply every tensor exactly.
  HsdParams<float> params = hsd_engine::init_params<float>(cfg);
  std::map<std::string, std::pair<std::vector<std::uint32_t>, std::span<float>>> slots;
  params.for_each([&](const std::string& name, Component, const std::vector<std::uint32_t>& dims,
                      std::span<float> data) { slots.emplace(name, std::make_pair(dims, data)); });

  const auto count = in.get<std::uint32_t>();
  if (count != slots.size()) throw FormatError("hsdm: tensor count mismatch");
  std::set<std::string> seen;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name = in.get_string(in.get<std::uint16_t>());
    std::vector<std::uint32_t> dims(in.get<std::uint8_t>());
    for (auto& d : dims) d = in.get<std::uint32_t>();
    auto it = slots.find(name);
    if (it == slots.end()) throw FormatError("hsdm: unexpected tensor '" + name + "'");
    if (it->second.first != dims) throw FormatError("hsdm: tensor '" + name + "' has the wrong shape");
    if (!seen.insert(name).second) throw FormatError("hsdm: duplicate tensor '" + name + "'");
    for (auto& v : it->second.second) v = in.get<float>();
  }
  if (in.remaining() != 0) throw FormatError("hsdm: trailing bytes");
  return HsdModel(std::move(cfg), std::move(params));
}

void save_model(const HsdModel& model, const std::filesystem::path& path) {
  const auto bytes = encode_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

HsdModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

void write_loss_csv(const std::vector<LossRecord>& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "step,L_rec,L_vq0,L_vq1,L_pi\n";
  out.precision(9);
  for (const auto& r : curve) {
    out << r.step << ',' << r.l_rec << ',' << r.l_vq0 << ',' << r.l_vq1 << ',' << r.l_pi << '\n';
  }
}

}  // namespace playstyle
