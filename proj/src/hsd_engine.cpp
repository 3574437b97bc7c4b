#include <cmath>
#include <random>

#include "playstyle/errors.hpp"
#include "playstyle/hsd.hpp"
#include "playstyle/kernels.hpp"

namespace playstyle::hsd_engine {

namespace {

namespace kn = kernels::parallel;

template <typename Real>
Real huber(Real x, Real delta) {
  const Real a = std::abs(x);
  return a <= delta ? Real(0.5) * x * x : delta * (a - Real(0.5) * delta);
}

template <typename Real>
Real huber_grad(Real x, Real delta) {
  if (x > delta) return delta;
  if (x < -delta) return -delta;
  return x;
}

template <typename Real>
void dense(const DenseParams<Real>& p, std::span<const Real> x, std::vector<Real>& y, std::size_t n) {
  y.resize(n * p.out);
  kn::dense_forward<Real>(x, p.w, p.b, y, n, p.in, p.out);
}

template <typename Real>
void relu(std::vector<Real>& v) {
  for (auto& x : v) x = x > Real(0) ? x : Real(0);
}

// Zeroes gradient entries where the post-activation was clamped.
template <typename Real>
void relu_mask(std::vector<Real>& grad, const std::vector<Real>& activated) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > Real(0))) grad[i] = Real(0);
  }
}

// dX (optional) and parameter gradients for one dense layer.
template <typename Real>
void dense_back(const DenseParams<Real>& p, DenseParams<Real>& g, std::span<const Real> x,
                std::span<const Real> dy, std::vector<Real>* dx, std::size_t n) {
  kn::dense_backward_params<Real>(x, dy, g.w, g.b, n, p.in, p.out);
  if (dx != nullptr) {
    dx->resize(n * p.in);
    kn::dense_backward_input<Real>(dy, p.w, *dx, n, p.in, p.out);
  }
}

template <typename Real>
void gather_rows(const CodebookParams<Real>& book, std::span<const std::uint32_t> codes, std::vector<Real>& out) {
  out.resize(codes.size() * book.dim);
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const Real* row = book.rows.data() + static_cast<std::size_t>(codes[i]) * book.dim;
    std::copy(row, row + book.dim, out.begin() + static_cast<std::ptrdiff_t>(i * book.dim));
  }
}

// Cuts observations into non-overlapping patch x patch tiles spanning all
// frames. Row (sample, cell) holds (frame, dy, dx) in that order.
template <typename Real>
void extract_patches(const HsdConfig& cfg, std::span<const std::uint8_t> obs, std::size_t n,
                     std::vector<Real>& out) {
  const std::size_t frames = cfg.frames();
  const std::size_t height = cfg.obs_shape[cfg.obs_shape.size() - 2];
  const std::size_t width = cfg.obs_shape.back();
  const std::size_t p = cfg.patch;
  const std::size_t gw = width / p;
  const std::size_t cells = cfg.base_cells();
  const std::size_t ps = cfg.patch_size();
  const std::size_t obs_size = frames * height * width;
  out.resize(n * cells * ps);
#pragma omp parallel for schedule(static)
  for (std::size_t s = 0; s < n; ++s) {
    const std::uint8_t* o = obs.data() + s * obs_size;
    for (std::size_t c = 0; c < cells; ++c) {
      const std::size_t r0 = (c / gw) * p;
      const std::size_t c0 = (c % gw) * p;
      Real* dst = out.data() + (s * cells + c) * ps;
      for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t dy = 0; dy < p; ++dy) {
          const std::uint8_t* src = o + f * height * width + (r0 + dy) * width + c0;
          for (std::size_t dx = 0; dx < p; ++dx) *dst++ = static_cast<Real>(src[dx]) / Real(255);
        }
      }
    }
  }
}

void check_shapes(const HsdConfig& cfg, const PlayDataset& ds) {
  if (ds.obs_shape() != cfg.obs_shape) throw ShapeError("hsd: observation shape does not match model");
  if (!(ds.action_space() == cfg.action_space)) throw ShapeError("hsd: action space does not match model");
}

template <typename Real>
void init_dense(DenseParams<Real>& d, std::size_t in, std::size_t out, bool relu, std::mt19937_64& rng) {
  d.resize(in, out);
  // Variance 2/fan_in ahead of a ReLU, 1/fan_in otherwise.
  const double bound = std::sqrt((relu ? 6.0 : 3.0) / static_cast<double>(in));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& w : d.w) w = static_cast<Real>(u(rng));
}

template <typename Real>
void init_codebook(CodebookParams<Real>& c, std::size_t k, std::size_t dim, double stddev, std::mt19937_64& rng) {
  c.resize(k, dim);
  std::normal_distribution<double> normal(0.0, stddev);
  for (auto& v : c.rows) {
    double x;
    do {
      x = normal(rng);
    } while (std::abs(x) > 2.0 * stddev);
    v = static_cast<Real>(x);
  }
}

}  // namespace

template <typename Real>
HsdParams<Real> init_params(const HsdConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  HsdParams<Real> p;
  init_dense(p.enc0_hidden, cfg.patch_size(), cfg.enc0_hidden, true, rng);
  init_dense(p.enc0_out, cfg.enc0_hidden, cfg.cell_dim0, false, rng);
  init_codebook(p.embed0, cfg.codebook0, cfg.cell_dim0, cfg.embed_init_std, rng);
  init_dense(p.enc1_hidden, cfg.base_width(), cfg.fc_hidden, true, rng);
  init_dense(p.enc1_out, cfg.fc_hidden, cfg.latent_width, false, rng);
  init_codebook(p.embed1, cfg.codebook, cfg.cell_dim1(), cfg.embed_init_std, rng);
  init_dense(p.dec1_hidden, cfg.latent_width, cfg.dec_hidden, true, rng);
  init_dense(p.dec1_out, cfg.dec_hidden, cfg.base_width(), false, rng);
  init_dense(p.rec_hidden, cfg.cell_dim0, cfg.rec_hidden, true, rng);
  init_dense(p.rec_out, cfg.rec_hidden, cfg.patch_size(), false, rng);
  init_dense(p.pi_hidden, cfg.base_width(), cfg.policy_hidden, true, rng);
  init_dense(p.pi_out, cfg.policy_hidden, cfg.policy_outputs(), false, rng);
  return p;
}

template <typename Real>
ForwardTrace<Real> forward(const HsdConfig& cfg, const HsdParams<Real>& params, const PlayDataset& ds,
                           std::span<const std::size_t> batch, Real alpha, bool train_noise,
                           std::uint64_t noise_seed, const FrozenAssignments* frozen) {
  if (!(alpha >= Real(0) && alpha <= Real(1))) throw DomainError("hsd forward: alpha outside [0, 1]");
  if (batch.empty()) throw SizeError("hsd forward: empty batch");
  check_shapes(cfg, ds);

  const std::size_t n = batch.size();
  const std::size_t cells0 = cfg.base_cells();
  const std::size_t d0 = cfg.cell_dim0;
  const std::size_t cells1 = cfg.cells;
  const std::size_t d1 = cfg.cell_dim1();
  const std::size_t width0 = cfg.base_width();
  const std::size_t ps = cfg.patch_size();
  const Real delta = static_cast<Real>(cfg.huber_delta);

  ForwardTrace<Real> t;
  t.batch.assign(batch.begin(), batch.end());
  t.param_version = params.version;
  t.alpha = alpha;

  std::vector<std::uint8_t> raw(n * ds.obs_size());
  for (std::size_t i = 0; i < n; ++i) {
    if (batch[i] >= ds.size()) throw SizeError("hsd forward: batch index out of range");
    auto o = ds.observation(batch[i]);
    std::copy(o.begin(), o.end(), raw.begin() + static_cast<std::ptrdiff_t>(i * ds.obs_size()));
  }
  extract_patches(cfg, raw, n, t.target);
  t.input = t.target;
  if (train_noise && cfg.pixel_noise > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, cfg.pixel_noise / 255.0);
    for (auto& v : t.input) v += static_cast<Real>(noise(rng));
  }

  // Hierarchy 0.
  dense(params.enc0_hidden, std::span<const Real>(t.input), t.h0, n * cells0);
  relu(t.h0);
  dense(params.enc0_out, std::span<const Real>(t.h0), t.z_e0, n * cells0);
  if (frozen != nullptr) {
    if (frozen->codes0.size() != n * cells0) throw ShapeError("hsd forward: frozen codes0 size");
    t.codes0 = frozen->codes0;
  } else {
    t.codes0.resize(n * cells0);
    kn::nearest_rows<Real>(t.z_e0, params.embed0.rows, t.codes0, n * cells0, d0, params.embed0.entries);
  }
  gather_rows(params.embed0, t.codes0, t.z_q0);

  // Hierarchy 1.
  dense(params.enc1_hidden, std::span<const Real>(t.z_q0), t.g1, n);
  relu(t.g1);
  dense(params.enc1_out, std::span<const Real>(t.g1), t.z_e1, n);
  if (frozen != nullptr) {
    if (frozen->codes1.size() != n * cells1) throw ShapeError("hsd forward: frozen codes1 size");
    t.codes1 = frozen->codes1;
  } else {
    t.codes1.resize(n * cells1);
    kn::nearest_rows<Real>(t.z_e1, params.embed1.rows, t.codes1, n * cells1, d1, params.embed1.entries);
  }
  gather_rows(params.embed1, t.codes1, t.z_q1);

  dense(params.dec1_hidden, std::span<const Real>(t.z_q1), t.d1, n);
  relu(t.d1);
  dense(params.dec1_out, std::span<const Real>(t.d1), t.r0, n);

  t.mixed.resize(n * width0);
  for (std::size_t i = 0; i < t.mixed.size(); ++i) t.mixed[i] = alpha * t.z_q0[i] + (Real(1) - alpha) * t.r0[i];

  // Base decoders.
  dense(params.rec_hidden, std::span<const Real>(t.mixed), t.hr, n * cells0);
  relu(t.hr);
  dense(params.rec_out, std::span<const Real>(t.hr), t.recon, n * cells0);
  dense(params.pi_hidden, std::span<const Real>(t.mixed), t.hp, n);
  relu(t.hp);
  dense(params.pi_out, std::span<const Real>(t.hp), t.policy, n);

  // Losses.
  Real acc = 0;
  for (std::size_t i = 0; i < t.recon.size(); ++i) acc += huber(t.recon[i] - t.target[i], delta);
  t.l_rec = acc / static_cast<Real>(n * cells0 * ps);

  acc = 0;
  for (std::size_t i = 0; i < t.z_e0.size(); ++i) acc += huber(t.z_e0[i] - t.z_q0[i], delta);
  t.l_vq0 = acc / static_cast<Real>(t.z_e0.size());
  acc = 0;
  for (std::size_t i = 0; i < t.z_e1.size(); ++i) acc += huber(t.z_e1[i] - t.z_q1[i], delta);
  t.l_vq1 = acc / static_cast<Real>(t.z_e1.size());

  const std::size_t outs = cfg.policy_outputs();
  acc = 0;
  if (cfg.action_space.kind == ActionKind::kDiscrete) {
    t.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      t.labels[i] = ds.discrete_action(batch[i]);
      const Real* z = t.policy.data() + i * outs;
      Real mx = z[0];
      for (std::size_t k = 1; k < outs; ++k) mx = std::max(mx, z[k]);
      Real sum = 0;
      for (std::size_t k = 0; k < outs; ++k) sum += std::exp(z[k] - mx);
      acc += std::log(sum) + mx - z[t.labels[i]];
    }
    t.l_pi = acc / static_cast<Real>(n);
  } else {
    t.action_targets.resize(n * outs);
    for (std::size_t i = 0; i < n; ++i) {
      auto a = ds.continuous_action(batch[i]);
      for (std::size_t k = 0; k < outs; ++k) {
        t.action_targets[i * outs + k] = static_cast<Real>(a[k]);
        acc += huber(t.policy[i * outs + k] - t.action_targets[i * outs + k], delta);
      }
    }
    t.l_pi = acc / static_cast<Real>(n * outs);
  }
  return t;
}

template <typename Real>
HsdParams<Real> backward(const HsdConfig& cfg, const HsdParams<Real>& params,
                         const ForwardTrace<Real>& t, std::span<const std::size_t> batch) {
  if (t.param_version != params.version) throw StateError("hsd backward: trace predates the current parameters");
  if (t.batch.size() != batch.size() || !std::equal(batch.begin(), batch.end(), t.batch.begin())) {
    throw StateError("hsd backward: trace was produced for a different batch");
  }

  const std::size_t n = batch.size();
  const std::size_t cells0 = cfg.base_cells();
  const std::size_t d0 = cfg.cell_dim0;
  const std::size_t d1 = cfg.cell_dim1();
  const std::size_t outs = cfg.policy_outputs();
  const Real delta = static_cast<Real>(cfg.huber_delta);
  const Real beta = static_cast<Real>(cfg.beta);
  const Real alpha = t.alpha;

  HsdParams<Real> g = params.zeros_like();
  std::vector<Real> tmp;

  // Observation decoder: dL_rec.
  std::vector<Real> d_recon(t.recon.size());
  const Real rec_scale = Real(1) / static_cast<Real>(t.recon.size());
  for (std::size_t i = 0; i < d_recon.size(); ++i) d_recon[i] = huber_grad(t.recon[i] - t.target[i], delta) * rec_scale;
  std::vector<Real> d_hr;
  dense_back(params.rec_out, g.rec_out, std::span<const Real>(t.hr), std::span<const Real>(d_recon), &d_hr, n * cells0);
  relu_mask(d_hr, t.hr);
  std::vector<Real> d_mixed;
  dense_back(params.rec_hidden, g.rec_hidden, std::span<const Real>(t.mixed), std::span<const Real>(d_hr), &d_mixed,
             n * cells0);

  // Policy decoder: dL_pi.
  std::vector<Real> d_policy(t.policy.size());
  if (cfg.action_space.kind == ActionKind::kDiscrete) {
    for (std::size_t i = 0; i < n; ++i) {
      const Real* z = t.policy.data() + i * outs;
      Real mx = z[0];
      for (std::size_t k = 1; k < outs; ++k) mx = std::max(mx, z[k]);
      Real sum = 0;
      for (std::size_t k = 0; k < outs; ++k) sum += std::exp(z[k] - mx);
      for (std::size_t k = 0; k < outs; ++k) {
        const Real p = std::exp(z[k] - mx) / sum;
        d_policy[i * outs + k] = (p - (k == t.labels[i] ? Real(1) : Real(0))) / static_cast<Real>(n);
      }
    }
  } else {
    const Real scale = Real(1) / static_cast<Real>(n * outs);
    for (std::size_t i = 0; i < d_policy.size(); ++i) {
      d_policy[i] = huber_grad(t.policy[i] - t.action_targets[i], delta) * scale;
    }
  }
  std::vector<Real> d_hp;
  dense_back(params.pi_out, g.pi_out, std::span<const Real>(t.hp), std::span<const Real>(d_policy), &d_hp, n);
  relu_mask(d_hp, t.hp);
  dense_back(params.pi_hidden, g.pi_hidden, std::span<const Real>(t.mixed), std::span<const Real>(d_hp), &tmp, n);
  for (std::size_t i = 0; i < d_mixed.size(); ++i) d_mixed[i] += tmp[i];

  // Weighted sum: m = alpha * z_q0 + (1 - alpha) * r0.
  std::vector<Real> d_r0(d_mixed.size());
  std::vector<Real> d_zq0(d_mixed.size());
  for (std::size_t i = 0; i < d_mixed.size(); ++i) {
    d_r0[i] = (Real(1) - alpha) * d_mixed[i];
    d_zq0[i] = alpha * d_mixed[i];
  }

  // Hierarchical decoder.
  std::vector<Real> d_d1;
  dense_back(params.dec1_out, g.dec1_out, std::span<const Real>(t.d1), std::span<const Real>(d_r0), &d_d1, n);
  relu_mask(d_d1, t.d1);
  std::vector<Real> d_zq1;
  dense_back(params.dec1_hidden, g.dec1_hidden, std::span<const Real>(t.z_q1), std::span<const Real>(d_d1), &d_zq1, n);

  // Hierarchy 1 quantizer. dL_vq1/dz_e1 = h'(z_e1 - z_q1) / count and
  // dL_vq1/dz_q1 is its negation, accumulated into the selected rows.
  std::vector<Real> d_vq1(t.z_e1.size());
  const Real vq1_scale = Real(1) / static_cast<Real>(t.z_e1.size());
  for (std::size_t i = 0; i < d_vq1.size(); ++i) d_vq1[i] = huber_grad(t.z_e1[i] - t.z_q1[i], delta) * vq1_scale;
  for (std::size_t c = 0; c < t.codes1.size(); ++c) {
    Real* row = g.embed1.rows.data() + static_cast<std::size_t>(t.codes1[c]) * d1;
    for (std::size_t k = 0; k < d1; ++k) row[k] -= d_vq1[c * d1 + k];
  }

  // Gradient copy: the decoder-input gradient at z_q1 lands on z_e1. The
  // beta-weighted L_vq1 term reaches theta_enc^1 only, not the layers below.
  std::vector<Real> d_ze1_full(d_zq1.size());
  for (std::size_t i = 0; i < d_zq1.size(); ++i) d_ze1_full[i] = d_zq1[i] + beta * d_vq1[i];
  std::vector<Real> d_g1_full;
  std::vector<Real> d_g1_task;
  dense_back(params.enc1_out, g.enc1_out, std::span<const Real>(t.g1), std::span<const Real>(d_ze1_full), &d_g1_full,
             n);
  d_g1_task.resize(d_g1_full.size());
  kn::dense_backward_input<Real>(d_zq1, params.enc1_out.w, d_g1_task, n, params.enc1_out.in, params.enc1_out.out);
  relu_mask(d_g1_full, t.g1);
  relu_mask(d_g1_task, t.g1);
  kn::dense_backward_params<Real>(t.z_q0, d_g1_full, g.enc1_hidden.w, g.enc1_hidden.b, n, params.enc1_hidden.in,
                                  params.enc1_hidden.out);
  tmp.resize(n * params.enc1_hidden.in);
  kn::dense_backward_input<Real>(d_g1_task, params.enc1_hidden.w, tmp, n, params.enc1_hidden.in,
                                 params.enc1_hidden.out);
  for (std::size_t i = 0; i < d_zq0.size(); ++i) d_zq0[i] += tmp[i];

  // Hierarchy 0 quantizer and encoder.
  std::vector<Real> d_vq0(t.z_e0.size());
  const Real vq0_scale = Real(1) / static_cast<Real>(t.z_e0.size());
  for (std::size_t i = 0; i < d_vq0.size(); ++i) d_vq0[i] = huber_grad(t.z_e0[i] - t.z_q0[i], delta) * vq0_scale;
  for (std::size_t c = 0; c < t.codes0.size(); ++c) {
    Real* row = g.embed0.rows.data() + static_cast<std::size_t>(t.codes0[c]) * d0;
    for (std::size_t k = 0; k < d0; ++k) row[k] -= d_vq0[c * d0 + k];
  }
  std::vector<Real> d_ze0(d_zq0.size());
  for (std::size_t i = 0; i < d_ze0.size(); ++i) d_ze0[i] = d_zq0[i] + beta * d_vq0[i];
  std::vector<Real> d_h0;
  dense_back(params.enc0_out, g.enc0_out, std::span<const Real>(t.h0), std::span<const Real>(d_ze0), &d_h0,
             n * cells0);
  relu_mask(d_h0, t.h0);
  dense_back(params.enc0_hidden, g.enc0_hidden, std::span<const Real>(t.input), std::span<const Real>(d_h0),
             static_cast<std::vector<Real>*>(nullptr), n * cells0);
  return g;
}

template <typename Real>
std::vector<std::uint32_t> encode(const HsdConfig& cfg, const HsdParams<Real>& params,
                                  std::span<const std::uint8_t> observations, std::size_t n, int hierarchy) {
  if (hierarchy != 0 && hierarchy != 1) throw DomainError("hsd encode: hierarchy must be 0 or 1");
  const std::size_t obs_size = shape_volume(cfg.obs_shape);
  if (observations.size() != n * obs_size) throw ShapeError("hsd encode: observation buffer size mismatch");
  const std::size_t cells0 = cfg.base_cells();
  const std::size_t per_sample = hierarchy == 0 ? cells0 : cfg.cells;
  std::vector<std::uint32_t> codes(n * per_sample);

  constexpr std::size_t kChunk = 256;
  std::vector<Real> patches, h0, z_e0, z_q0, g1, z_e1;
  std::vector<std::uint32_t> codes0;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t m = std::min(kChunk, n - start);
    extract_patches(cfg, observations.subspan(start * obs_size, m * obs_size), m, patches);
    dense(params.enc0_hidden, std::span<const Real>(patches), h0, m * cells0);
    relu(h0);
    dense(params.enc0_out, std::span<const Real>(h0), z_e0, m * cells0);
    codes0.resize(m * cells0);
    kn::nearest_rows<Real>(z_e0, params.embed0.rows, codes0, m * cells0, cfg.cell_dim0, params.embed0.entries);
    if (hierarchy == 0) {
      std::copy(codes0.begin(), codes0.end(), codes.begin() + static_cast<std::ptrdiff_t>(start * cells0));
      continue;
    }
    gather_rows(params.embed0, codes0, z_q0);
    dense(params.enc1_hidden, std::span<const Real>(z_q0), g1, m);
    relu(g1);
    dense(params.enc1_out, std::span<const Real>(g1), z_e1, m);
    kn::nearest_rows<Real>(z_e1, params.embed1.rows,
                           std::span<std::uint32_t>(codes).subspan(start * cfg.cells, m * cfg.cells), m * cfg.cells,
                           cfg.cell_dim1(), params.embed1.entries);
  }
  return codes;
}

template <typename Real>
std::vector<Real> latent_features(const HsdConfig& cfg, const HsdParams<Real>& params,
                                  std::span<const std::uint8_t> observations, std::size_t n) {
  const std::size_t obs_size = shape_volume(cfg.obs_shape);
  if (observations.size() != n * obs_size) throw ShapeError("hsd features: observation buffer size mismatch");
  const std::size_t cells0 = cfg.base_cells();
  std::vector<Real> out(n * cfg.latent_width);
  constexpr std::size_t kChunk = 256;
  std::vector<Real> patches, h0, z_e0, z_q0, g1, z_e1;
  std::vector<std::uint32_t> codes0;
  for (std::size_t start = 0; start < n; start += kChunk) {
    const std::size_t m = std::min(kChunk, n - start);
    extract_patches(cfg, observations.subspan(start * obs_size, m * obs_size), m, patches);
    dense(params.enc0_hidden, std::span<const Real>(patches), h0, m * cells0);
    relu(h0);
    dense(params.enc0_out, std::span<const Real>(h0), z_e0, m * cells0);
    codes0.resize(m * cells0);
    kn::nearest_rows<Real>(z_e0, params.embed0.rows, codes0, m * cells0, cfg.cell_dim0, params.embed0.entries);
    gather_rows(params.embed0, codes0, z_q0);
    dense(params.enc1_hidden, std::span<const Real>(z_q0), g1, m);
    relu(g1);
    dense(params.enc1_out, std::span<const Real>(g1), z_e1, m);
    std::copy(z_e1.begin(), z_e1.end(), out.begin() + static_cast<std::ptrdiff_t>(start * cfg.latent_width));
  }
  return out;
}

#define PLAYSTYLE_INSTANTIATE_ENGINE(Real)                                                                      \
  template HsdParams<Real> init_params<Real>(const HsdConfig&);                                                 \
  template ForwardTrace<Real> forward<Real>(const HsdConfig&, const HsdParams<Real>&, const PlayDataset&,       \
                                            std::span<const std::size_t>, Real, bool, std::uint64_t,           \
                                            const FrozenAssignments*);                                          \
  template HsdParams<Real> backward<Real>(const HsdConfig&, const HsdParams<Real>&, const ForwardTrace<Real>&,  \
                                          std::span<const std::size_t>);                                        \
  template std::vector<std::uint32_t> encode<Real>(const HsdConfig&, const HsdParams<Real>&,                    \
                                                   std::span<const std::uint8_t>, std::size_t, int);            \
  template std::vector<Real> latent_features<Real>(const HsdConfig&, const HsdParams<Real>&,                     \
                                                   std::span<const std::uint8_t>, std::size_t);

PLAYSTYLE_INSTANTIATE_ENGINE(float)
PLAYSTYLE_INSTANTIATE_ENGINE(double)

#undef PLAYSTYLE_INSTANTIATE_ENGINE

}  // namespace playstyle::hsd_engine
