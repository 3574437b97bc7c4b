#pragma once

// Hierarchical State Discretization: a VQ autoencoder with one fully
// connected hierarchy stacked on a patch-wise base encoder.
//
//   obs/255 -> patches -> enc0 (per cell) -> z_e0 -> VQ(E0) -> z_q0
//   z_q0 (flattened) -> enc1 -> z_e1 (B cells) -> VQ(E1) -> z_q1
//   z_q1 -> dec1 -> r0 (same shape as z_q0)
//   m = alpha * z_q0 + (1 - alpha) * r0
//   m (per cell) -> rec decoder -> reconstructed patches
//   m (flattened) -> policy decoder -> action logits / values
//
// The base encoder uses non-overlapping patches, i.e. a stride == kernel
// convolution written as one shared affine map per cell.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <algorithm>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "playstyle/dataset.hpp"

namespace playstyle {

struct HsdConfig {
  Shape obs_shape{4, 32, 32};
  ActionSpace action_space = ActionSpace::continuous(2);

  std::uint32_t patch = 4;
  std::uint32_t enc0_hidden = 32;
  std::uint32_t cell_dim0 = 8;
  std::uint32_t codebook0 = 16;

  std::uint32_t fc_hidden = 256;
  std::uint32_t latent_width = 500;  // hierarchy-1 units, split into `cells`
  std::uint32_t cells = 20;          // B
  std::uint32_t codebook = 2;        // K

  std::uint32_t dec_hidden = 256;
  std::uint32_t rec_hidden = 32;
  std::uint32_t policy_hidden = 64;

  double beta = 0.25;
  double huber_delta = 1.0;
  double learn_rate = 3e-4;
  std::uint32_t batch_size = 32;
  std::uint32_t epochs = 10;
  std::uint64_t seed = 1;
  double pixel_noise = 4.0;  // std dev on the 0..255 scale
  double embed_init_std = 0.02;
  // A code unused for this many consecutive steps is re-seeded from a random
  // encoder output of the current batch. 0 disables.
  std::uint32_t restart_window = 20;

  // Derived sizes.
  std::uint32_t frames() const;
  std::uint32_t base_cells() const;     // (H / patch) * (W / patch)
  std::uint32_t patch_size() const;     // frames * patch * patch
  std::uint32_t base_width() const;     // base_cells * cell_dim0
  std::uint32_t cell_dim1() const;      // latent_width / cells
  std::uint32_t policy_outputs() const;

  // Throws ConfigError when sizes are inconsistent.
  void validate() const;

  bool operator==(const HsdConfig&) const = default;
};

template <typename Real>
struct DenseParams {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<Real> w;  // [out x in]
  std::vector<Real> b;  // [out]

  void resize(std::size_t in_, std::size_t out_) {
    in = in_;
    out = out_;
    w.assign(in * out, Real(0));
    b.assign(out, Real(0));
  }
  bool operator==(const DenseParams&) const = default;
};

template <typename Real>
struct CodebookParams {
  std::size_t entries = 0;
  std::size_t dim = 0;
  std::vector<Real> rows;  // [entries x dim]

  void resize(std::size_t k, std::size_t d) {
    entries = k;
    dim = d;
    rows.assign(k * d, Real(0));
  }
  bool operator==(const CodebookParams&) const = default;
};

// The trainable components, grouped the way gradients are assigned.
enum class Component { kEnc0, kEmbed0, kEnc1, kEmbed1, kDec1, kRec, kPolicy };

template <typename Real>
struct HsdParams {
  DenseParams<Real> enc0_hidden, enc0_out;  // theta_enc^0
  CodebookParams<Real> embed0;              // theta_embed^0
  DenseParams<Real> enc1_hidden, enc1_out;  // theta_enc^1
  CodebookParams<Real> embed1;              // theta_embed^1
  DenseParams<Real> dec1_hidden, dec1_out;  // theta_dec^1
  DenseParams<Real> rec_hidden, rec_out;    // theta_rec
  DenseParams<Real> pi_hidden, pi_out;      // theta_pi

  // Bumped by every optimizer step; traces remember the value they saw.
  std::uint64_t version = 0;

  // Visits every tensor as (name, component, dims, data).
  template <typename F>
  void for_each(F&& f);
  template <typename F>
  void for_each(F&& f) const;

  // Zero-filled tensors of identical shape.
  HsdParams zeros_like() const;

  template <typename Other>
  HsdParams<Other> cast() const;

  bool operator==(const HsdParams& o) const;
};

// Per-batch intermediates kept for the backward pass.
template <typename Real>
struct ForwardTrace {
  std::vector<std::size_t> batch;
  std::uint64_t param_version = 0;
  Real alpha = Real(1);

  std::vector<Real> input;    // [N*C0 x patch] (noisy if training)
  std::vector<Real> target;   // [N*C0 x patch] clean observation / 255
  std::vector<Real> h0;       // [N*C0 x enc0_hidden] post-ReLU
  std::vector<Real> z_e0;     // [N*C0 x D0]
  std::vector<Real> z_q0;
  std::vector<std::uint32_t> codes0;  // [N*C0]
  std::vector<Real> g1;       // [N x fc_hidden] post-ReLU
  std::vector<Real> z_e1;     // [N x latent_width]
  std::vector<Real> z_q1;
  std::vector<std::uint32_t> codes1;  // [N*B]
  std::vector<Real> d1;       // [N x dec_hidden] post-ReLU
  std::vector<Real> r0;       // [N x C0*D0]
  std::vector<Real> mixed;    // [N x C0*D0]
  std::vector<Real> hr;       // [N*C0 x rec_hidden] post-ReLU
  std::vector<Real> recon;    // [N*C0 x patch]
  std::vector<Real> hp;       // [N x policy_hidden] post-ReLU
  std::vector<Real> policy;   // [N x outputs]
  std::vector<std::uint32_t> labels;  // discrete targets
  std::vector<Real> action_targets;   // continuous targets [N x dim]

  Real l_rec = Real(0);
  Real l_vq0 = Real(0);
  Real l_vq1 = Real(0);
  Real l_pi = Real(0);
};

struct FrozenAssignments {
  std::vector<std::uint32_t> codes0;
  std::vector<std::uint32_t> codes1;
};

// Templated engine. Real = float for training and inference, double for
// gradient verification.
namespace hsd_engine {

template <typename Real>
HsdParams<Real> init_params(const HsdConfig& cfg);

// `noise_seed` is only used when `train_noise` is set. When `frozen` is given
// its codes replace the nearest-neighbour assignment (for finite differences).
template <typename Real>
ForwardTrace<Real> forward(const HsdConfig& cfg, const HsdParams<Real>& params, const PlayDataset& ds,
                           std::span<const std::size_t> batch, Real alpha, bool train_noise,
                           std::uint64_t noise_seed, const FrozenAssignments* frozen = nullptr);

template <typename Real>
HsdParams<Real> backward(const HsdConfig& cfg, const HsdParams<Real>& params,
                         const ForwardTrace<Real>& trace, std::span<const std::size_t> batch);

// Encoder-only inference. Returns codes ([n x C0] for hierarchy 0, [n x B]
// for hierarchy 1) for n observations stored back to back.
template <typename Real>
std::vector<std::uint32_t> encode(const HsdConfig& cfg, const HsdParams<Real>& params,
                                  std::span<const std::uint8_t> observations, std::size_t n,
                                  int hierarchy);

// z_e1 features [n x latent_width].
template <typename Real>
std::vector<Real> latent_features(const HsdConfig& cfg, const HsdParams<Real>& params,
                                  std::span<const std::uint8_t> observations, std::size_t n);

}  // namespace hsd_engine

class HsdModel {
 public:
  HsdModel() = default;
  HsdModel(HsdConfig config, HsdParams<float> params)
      : config_(std::move(config)), params_(std::move(params)) {}

  const HsdConfig& config() const noexcept { return config_; }
  const HsdParams<float>& params() const noexcept { return params_; }
  HsdParams<float>& mutable_params() noexcept { return params_; }

  std::size_t code_length(int hierarchy) const;
  std::size_t alphabet(int hierarchy) const;

  bool operator==(const HsdModel& o) const { return config_ == o.config_ && params_ == o.params_; }

 private:
  HsdConfig config_;
  HsdParams<float> params_;
};

// Codebooks: truncated normal (std embed_init_std, cut at 2 std). Dense
// layers: uniform with variance 2/fan_in before a ReLU and 1/fan_in
// otherwise, zero bias. Deterministic per cfg.seed.
HsdModel init_model(const HsdConfig& cfg);

ForwardTrace<float> forward(const HsdModel& model, const PlayDataset& ds, std::span<const std::size_t> batch,
                            double alpha, bool train_noise, std::uint64_t noise_seed = 0);
HsdParams<float> backward(const HsdModel& model, const ForwardTrace<float>& trace,
                          std::span<const std::size_t> batch);

struct LossRecord {
  std::size_t step = 0;
  double l_rec = 0;
  double l_vq0 = 0;
  double l_vq1 = 0;
  double l_pi = 0;
};

struct TrainResult {
  HsdModel model;
  std::vector<LossRecord> curve;
};

using TrainProgress = std::function<void(const LossRecord&)>;

// Minibatch Adam over model.config().epochs epochs with alpha ~ U(0,1) per
// batch. Throws TrainingError on a non-finite loss.
TrainResult train(HsdModel model, const PlayDataset& ds, const TrainProgress& progress = {});

// Distinct codes at `hierarchy` over the dataset.
std::size_t codebook_usage(const HsdModel& model, const PlayDataset& ds, int hierarchy);

// "HSDM" | u16 version | config | named tensors (u16 name length, name,
// u8 rank, u32 dims, f32 payload). Little-endian.
inline constexpr std::uint16_t kModelVersion = 1;

void save_model(const HsdModel& model, const std::filesystem::path& path);
HsdModel load_model(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_model(const HsdModel& model);
HsdModel decode_model(std::span<const std::uint8_t> bytes);

void write_loss_csv(const std::vector<LossRecord>& curve, const std::filesystem::path& path);

}  // namespace playstyle

#include "playstyle/hsd_params.inl"
