// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_NN_UNET_HPP
#define SPECREC_NN_UNET_HPP

#include <array>
#include <cstdint>
#include <string>

#include "specrec/diffusion.hpp"
#include "specrec/grid.hpp"
#include "specrec/nn/layers.hpp"
#include "specrec/nn/tensor.hpp"

namespace specrec::nn {

// Time-conditioned epsilon-predictor: 4 resolution levels with channel
// multipliers {1,2,2,4} (input 128 -> 64 -> 32 -> 16), two residual blocks
// per level, self-attention on the deepest level and the bottleneck,
// symmetric decoder with skip concatenation. Works on any input with both
// dimensions divisible by 8.
struct UNetConfig {
  int base_channels = 64;
  int time_dim = 256;
  int groups = 8;
  static constexpr std::array<int, 4> mults{1, 2, 2, 4};

  void validate() const;
  int width(int level) const { return base_channels * mults[static_cast<size_t>(level)]; }
};

struct ResBlock {
  int cin = 0, cout = 0;
  GroupNorm gn1, gn2;
  Conv2d conv1, conv2;  // conv2 zero-initialized
  Linear temb_proj;
  Conv2d skip;  // 1x1, present only when cin != cout
  bool has_skip = false;

  struct Acts {
    Tensor x_in;
    GroupNorm::Cache gn1c, gn2c;
  };

  void build(ParamStore& store, const std::string& name, int cin_, int cout_, int time_dim, int groups);
  void forward(const Tensor& x, const Tensor& silu_temb, Tensor& y, Acts& acts, Scratch& s) const;
  // gx accumulates; g_silu_temb accumulates the shared time-path gradient
  void backward(const Tensor& gy, const Acts& acts, const Tensor& silu_temb, Tensor& gx,
                Tensor& g_silu_temb, double* gflat, Scratch& s) const;
};

struct AttentionBlock {
  int channels = 0;
  GroupNorm gn;
  Conv2d to_q, to_k, to_v, proj;  // 1x1; proj zero-initialized

  struct Acts {
    GroupNorm::Cache gnc;
    Tensor q, k, v, attn, o;  // attn: (1, npix, npix) row-softmaxed
  };

  void build(ParamStore& store, const std::string& name, int channels_, int groups);
  void forward(const Tensor& x, Tensor& y, Acts& acts, Scratch& s) const;
  void backward(const Tensor& gy, const Acts& acts, Tensor& gx, double* gflat, Scratch& s) const;
};

class UNet : public NoisePredictor {
 public:
  explicit UNet(const UNetConfig& cfg);

  void init_params(std::uint64_t seed);

  struct Acts {
    Tensor x_in;
    Tensor temb_sin, temb_z1, temb_a1, temb, silu_temb;
    std::array<std::array<ResBlock::Acts, 2>, 4> enc_rb;
    std::array<AttentionBlock::Acts, 2> enc_attn;
    std::array<Tensor, 4> skip;  // level outputs; also the down-conv inputs
    ResBlock::Acts mid_rb1_acts, mid_rb2_acts;
    AttentionBlock::Acts mid_attn_acts;
    std::array<std::array<ResBlock::Acts, 2>, 4> dec_rb;
    std::array<AttentionBlock::Acts, 2> dec_attn;
    std::array<Tensor, 3> up_in;  // upsampled tensor fed to up conv, levels 3..1
    GroupNorm::Cache out_gnc;
    Tensor out_head_in;
  };

  // single-sample pass; eps_out has the input's shape
  void forward(const Tensor& x, int t, Tensor& eps_out, Acts& acts, Scratch& s) const;
  void backward(const Tensor& g_eps, Acts& acts, double* gflat, Scratch& s) const;

  GridF predict(const GridF& x_t, int t) const override;

  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }
  const UNetConfig& config() const { return cfg_; }

  // copies a flat parameter vector in store order (EMA, tests)
  void export_flat(std::vector<double>& out) const;
  void import_flat(const std::vector<double>& in);

 private:
  UNetConfig cfg_;
  ParamStore store_;

  Conv2d conv_in_;
  Linear temb_lin1_, temb_lin2_;
  std::array<std::array<ResBlock, 2>, 4> enc_rb_;
  std::array<AttentionBlock, 2> enc_attn_;
  std::array<Conv2d, 3> down_;
  ResBlock mid_rb1_, mid_rb2_;
  AttentionBlock mid_attn_;
  std::array<std::array<ResBlock, 2>, 4> dec_rb_;
  std::array<AttentionBlock, 2> dec_attn_;
  std::array<Conv2d, 3> up_;  // index l-1 maps level l -> l-1
  GroupNorm out_gn_;
  Conv2d out_conv_;

  std::vector<Param*> zero_init_;
};

}  // namespace specrec::nn

#endif  // SPECREC_NN_UNET_HPP
