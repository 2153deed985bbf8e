// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#define EIGEN_DONT_PARALLELIZE
#include "specrec/nn/unet.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "specrec/rng.hpp"

namespace specrec::nn {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

void UNetConfig::validate() const {
  if (base_channels < groups || base_channels % groups != 0)
    throw std::invalid_argument("UNetConfig: base_channels must be a positive multiple of groups");
  if (time_dim < 2 || time_dim % 2 != 0) throw std::invalid_argument("UNetConfig: time_dim must be even");
  if (groups < 1) throw std::invalid_argument("UNetConfig: groups must be >= 1");
}

// ---------------------------------------------------------------- ResBlock

void ResBlock::build(ParamStore& store, const std::string& name, int cin_, int cout_, int time_dim,
                     int groups) {
  cin = cin_;
  cout = cout_;
  gn1.build(store, name + ".gn1", cin, groups);
  conv1.build(store, name + ".conv1", cin, cout, 3, 1, 1);
  temb_proj.build(store, name + ".temb", time_dim, cout);
  gn2.build(store, name + ".gn2", cout, groups);
  conv2.build(store, name + ".conv2", cout, cout, 3, 1, 1);
  has_skip = cin != cout;
  if (has_skip) skip.build(store, name + ".skip", cin, cout, 1, 1, 0);
}

void ResBlock::forward(const Tensor& x, const Tensor& silu_temb, Tensor& y, Acts& acts, Scratch& s) const {
  acts.x_in = x;
  gn1.forward(x, s.tmp[0], acts.gn1c);
  silu_forward(s.tmp[0], s.tmp[1]);
  conv1.forward(s.tmp[1], s.tmp[2], s);

  temb_proj.forward(silu_temb, s.tmp[3]);
  const int npix = s.tmp[2].pixels();
  for (int co = 0; co < cout; ++co) {
    const double bias = s.tmp[3].v[co];
    double* plane = s.tmp[2].data() + static_cast<size_t>(co) * npix;
    for (int i = 0; i < npix; ++i) plane[i] += bias;
  }

  gn2.forward(s.tmp[2], s.tmp[4], acts.gn2c);
  silu_forward(s.tmp[4], s.tmp[5]);
  conv2.forward(s.tmp[5], y, s);

  if (has_skip) {
    skip.forward(x, s.tmp[0], s);
    for (size_t i = 0; i < y.size(); ++i) y.v[i] += s.tmp[0].v[i];
  } else {
    for (size_t i = 0; i < y.size(); ++i) y.v[i] += x.v[i];
  }
}

void ResBlock::backward(const Tensor& gy, const Acts& acts, const Tensor& silu_temb, Tensor& gx,
                        Tensor& g_silu_temb, double* gflat, Scratch& s) const {
  // recompute the activations the caches do not store
  gn1.apply_affine(acts.gn1c.xhat, s.tmp[0]);  // n1
  silu_forward(s.tmp[0], s.tmp[1]);            // a1
  gn2.apply_affine(acts.gn2c.xhat, s.tmp[2]);  // n2
  silu_forward(s.tmp[2], s.tmp[3]);            // a2

  // conv2 branch
  s.tmp[4].resize(s.tmp[3].c, s.tmp[3].h, s.tmp[3].w);  // g_a2
  conv2.backward(s.tmp[3], gy, &s.tmp[4], gflat, s);
  s.tmp[5].resize(s.tmp[2].c, s.tmp[2].h, s.tmp[2].w);  // g_n2
  silu_backward(s.tmp[2], s.tmp[4], s.tmp[5]);
  s.tmp[4].resize(s.tmp[2].c, s.tmp[2].h, s.tmp[2].w);  // g_h
  gn2.backward(s.tmp[5], acts.gn2c, s.tmp[4], gflat);

  // time-bias branch: per-channel spatial sum
  s.tmp[6].resize(cout, 1, 1);
  {
    const int npix = s.tmp[4].pixels();
    for (int co = 0; co < cout; ++co) {
      const double* plane = s.tmp[4].data() + static_cast<size_t>(co) * npix;
      double sum = 0.0;
      for (int i = 0; i < npix; ++i) sum += plane[i];
      s.tmp[6].v[co] = sum;
    }
  }
  temb_proj.backward(silu_temb, s.tmp[6], &g_silu_temb, gflat);

  // conv1 branch
  s.tmp[5].resize(s.tmp[1].c, s.tmp[1].h, s.tmp[1].w);  // g_a1
  conv1.backward(s.tmp[1], s.tmp[4], &s.tmp[5], gflat, s);
  s.tmp[3].resize(s.tmp[0].c, s.tmp[0].h, s.tmp[0].w);  // g_n1
  silu_backward(s.tmp[0], s.tmp[5], s.tmp[3]);
  gn1.backward(s.tmp[3], acts.gn1c, gx, gflat);

  // residual branch
  if (has_skip) {
    skip.backward(acts.x_in, gy, &gx, gflat, s);
  } else {
    for (size_t i = 0; i < gx.size(); ++i) gx.v[i] += gy.v[i];
  }
}

// ----------------------------------------------------------- Attention

void AttentionBlock::build(ParamStore& store, const std::string& name, int channels_, int groups) {
  channels = channels_;
  gn.build(store, name + ".gn", channels, groups);
  to_q.build(store, name + ".q", channels, channels, 1, 1, 0);
  to_k.build(store, name + ".k", channels, channels, 1, 1, 0);
  to_v.build(store, name + ".v", channels, channels, 1, 1, 0);
  proj.build(store, name + ".proj", channels, channels, 1, 1, 0);
}

void AttentionBlock::forward(const Tensor& x, Tensor& y, Acts& acts, Scratch& s) const {
  gn.forward(x, s.tmp[0], acts.gnc);
  to_q.forward(s.tmp[0], acts.q, s);
  to_k.forward(s.tmp[0], acts.k, s);
  to_v.forward(s.tmp[0], acts.v, s);

  const int npix = x.pixels();
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels));
  acts.attn.resize(1, npix, npix);
  {
    CMatMap Q(acts.q.data(), channels, npix);
    CMatMap K(acts.k.data(), channels, npix);
    MatMap A(acts.attn.data(), npix, npix);
    A.noalias() = Q.transpose() * K * scale;
  }
  // row softmax
  for (int i = 0; i < npix; ++i) {
    double* row = acts.attn.data() + static_cast<size_t>(i) * npix;
    double mx = row[0];
    for (int j = 1; j < npix; ++j) mx = std::max(mx, row[j]);
    double sum = 0.0;
    for (int j = 0; j < npix; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const double inv = 1.0 / sum;
    for (int j = 0; j < npix; ++j) row[j] *= inv;
  }
  acts.o.resize(channels, x.h, x.w);
  {
    CMatMap V(acts.v.data(), channels, npix);
    CMatMap A(acts.attn.data(), npix, npix);
    MatMap O(acts.o.data(), channels, npix);
    O.noalias() = V * A.transpose();
  }
  proj.forward(acts.o, s.tmp[1], s);
  y.resize(x.c, x.h, x.w);
  for (size_t i = 0; i < y.size(); ++i) y.v[i] = x.v[i] + s.tmp[1].v[i];
}

void AttentionBlock::backward(const Tensor& gy, const Acts& acts, Tensor& gx, double* gflat,
                              Scratch& s) const {
  const int npix = gy.pixels();
  const double scale = 1.0 / std::sqrt(static_cast<double>(channels));

  for (size_t i = 0; i < gx.size(); ++i) gx.v[i] += gy.v[i];

  s.tmp[1].resize(channels, gy.h, gy.w);  // g_o
  proj.backward(acts.o, gy, &s.tmp[1], gflat, s);

  s.tmp[2].resize(1, npix, npix);         // gA, then gS in place
  s.tmp[3].resize(channels, gy.h, gy.w);  // gV
  {
    CMatMap Go(s.tmp[1].data(), channels, npix);
    CMatMap V(acts.v.data(), channels, npix);
    CMatMap A(acts.attn.data(), npix, npix);
    MatMap gA(s.tmp[2].data(), npix, npix);
    MatMap gV(s.tmp[3].data(), channels, npix);
    gA.noalias() = Go.transpose() * V;
    gV.noalias() = Go * A;
  }
  for (int i = 0; i < npix; ++i) {
    double* ga = s.tmp[2].data() + static_cast<size_t>(i) * npix;
    const double* a = acts.attn.data() + static_cast<size_t>(i) * npix;
    double dot = 0.0;
    for (int j = 0; j < npix; ++j) dot += ga[j] * a[j];
    for (int j = 0; j < npix; ++j) ga[j] = a[j] * (ga[j] - dot);
  }
  s.tmp[4].resize(channels, gy.h, gy.w);  // gQ
  s.tmp[5].resize(channels, gy.h, gy.w);  // gK
  {
    CMatMap Q(acts.q.data(), channels, npix);
    CMatMap K(acts.k.data(), channels, npix);
    CMatMap gS(s.tmp[2].data(), npix, npix);
    MatMap gQ(s.tmp[4].data(), channels, npix);
    MatMap gK(s.tmp[5].data(), channels, npix);
    gQ.noalias() = K * gS.transpose() * scale;
    gK.noalias() = Q * gS * scale;
  }

  gn.apply_affine(acts.gnc.xhat, s.tmp[0]);  // n
  s.tmp[6].resize(channels, gy.h, gy.w);     // g_n
  to_q.backward(s.tmp[0], s.tmp[4], &s.tmp[6], gflat, s);
  to_k.backward(s.tmp[0], s.tmp[5], &s.tmp[6], gflat, s);
  to_v.backward(s.tmp[0], s.tmp[3], &s.tmp[6], gflat, s);
  gn.backward(s.tmp[6], acts.gnc, gx, gflat);
}

// --------------------------------------------------------------- UNet

UNet::UNet(const UNetConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int c0 = cfg_.width(0), c1 = cfg_.width(1), c2 = cfg_.width(2), c3 = cfg_.width(3);
  const int td = cfg_.time_dim, g = cfg_.groups;

  conv_in_.build(store_, "conv_in", 1, c0, 3, 1, 1);
  temb_lin1_.build(store_, "temb.lin1", td, td);
  temb_lin2_.build(store_, "temb.lin2", td, td);

  const std::array<int, 4> widths{c0, c1, c2, c3};
  for (int l = 0; l < 4; ++l) {
    const int in0 = l == 0 ? c0 : widths[l - 1];
    enc_rb_[l][0].build(store_, "enc" + std::to_string(l) + ".rb0", in0, widths[l], td, g);
    enc_rb_[l][1].build(store_, "enc" + std::to_string(l) + ".rb1", widths[l], widths[l], td, g);
    if (l == 3) {
      enc_attn_[0].build(store_, "enc3.attn0", c3, g);
      enc_attn_[1].build(store_, "enc3.attn1", c3, g);
    }
    if (l < 3) down_[l].build(store_, "down" + std::to_string(l), widths[l], widths[l], 3, 2, 1);
  }

  mid_rb1_.build(store_, "mid.rb1", c3, c3, td, g);
  mid_attn_.build(store_, "mid.attn", c3, g);
  mid_rb2_.build(store_, "mid.rb2", c3, c3, td, g);

  for (int l = 3; l >= 0; --l) {
    const int cat = 2 * widths[l];
    dec_rb_[l][0].build(store_, "dec" + std::to_string(l) + ".rb0", cat, widths[l], td, g);
    dec_rb_[l][1].build(store_, "dec" + std::to_string(l) + ".rb1", widths[l], widths[l], td, g);
    if (l == 3) {
      dec_attn_[0].build(store_, "dec3.attn0", c3, g);
      dec_attn_[1].build(store_, "dec3.attn1", c3, g);
    }
    if (l > 0) up_[l - 1].build(store_, "up" + std::to_string(l), widths[l], widths[l - 1], 3, 1, 1);
  }

  out_gn_.build(store_, "out.gn", c0, g);
  out_conv_.build(store_, "out.conv", c0, 1, 3, 1, 1);

  for (auto& level : enc_rb_)
    for (auto& rb : level) zero_init_.push_back(rb.conv2.W);
  zero_init_.push_back(mid_rb1_.conv2.W);
  zero_init_.push_back(mid_rb2_.conv2.W);
  for (auto& level : dec_rb_)
    for (auto& rb : level) zero_init_.push_back(rb.conv2.W);
  for (auto* attn : {&enc_attn_[0], &enc_attn_[1], &mid_attn_, &dec_attn_[0], &dec_attn_[1]})
    zero_init_.push_back(attn->proj.W);
  zero_init_.push_back(out_conv_.W);
}

void UNet::init_params(std::uint64_t seed) {
  std::uint64_t index = 0;
  for (Param& p : store_.items()) {
    ++index;
    if (p.name.size() < 7 || p.name.substr(p.name.size() - 7) != ".weight") continue;
    const double std_dev = 1.0 / std::sqrt(static_cast<double>(p.value.h));
    Rng rng(seed, kStreamInit, index);
    for (double& v : p.value.v) v = std_dev * rng.normal();
  }
  for (Param* p : zero_init_) p->value.zero();
}

namespace {
void concat_channels(const Tensor& a, const Tensor& b, Tensor& out) {
  out.resize(a.c + b.c, a.h, a.w);
  std::memcpy(out.data(), a.data(), a.size() * sizeof(double));
  std::memcpy(out.data() + a.size(), b.data(), b.size() * sizeof(double));
}
}  // namespace

void UNet::forward(const Tensor& x, int t, Tensor& eps_out, Acts& acts, Scratch& s) const {
  if (x.c != 1) throw std::invalid_argument("UNet: input must have one channel");
  if (x.h < 8 || x.w < 8 || x.h % 8 != 0 || x.w % 8 != 0)
    throw std::invalid_argument("UNet: input dimensions must be multiples of 8");

  acts.x_in = x;
  sinusoidal_embedding(t, cfg_.time_dim, acts.temb_sin);
  temb_lin1_.forward(acts.temb_sin, acts.temb_z1);
  silu_forward(acts.temb_z1, acts.temb_a1);
  temb_lin2_.forward(acts.temb_a1, acts.temb);
  silu_forward(acts.temb, acts.silu_temb);

  Tensor h, t1;
  conv_in_.forward(x, h, s);

  for (int l = 0; l < 4; ++l) {
    for (int b = 0; b < 2; ++b) {
      enc_rb_[l][b].forward(h, acts.silu_temb, t1, acts.enc_rb[l][b], s);
      std::swap(h, t1);
      if (l == 3) {
        enc_attn_[b].forward(h, t1, acts.enc_attn[b], s);
        std::swap(h, t1);
      }
    }
    acts.skip[l] = h;
    if (l < 3) {
      down_[l].forward(acts.skip[l], t1, s);
      std::swap(h, t1);
    }
  }

  mid_rb1_.forward(h, acts.silu_temb, t1, acts.mid_rb1_acts, s);
  std::swap(h, t1);
  mid_attn_.forward(h, t1, acts.mid_attn_acts, s);
  std::swap(h, t1);
  mid_rb2_.forward(h, acts.silu_temb, t1, acts.mid_rb2_acts, s);
  std::swap(h, t1);

  for (int l = 3; l >= 0; --l) {
    concat_channels(h, acts.skip[l], t1);
    std::swap(h, t1);
    for (int b = 0; b < 2; ++b) {
      dec_rb_[l][b].forward(h, acts.silu_temb, t1, acts.dec_rb[l][b], s);
      std::swap(h, t1);
      if (l == 3) {
        dec_attn_[b].forward(h, t1, acts.dec_attn[b], s);
        std::swap(h, t1);
      }
    }
    if (l > 0) {
      upsample_nearest2(h, acts.up_in[l - 1]);
      up_[l - 1].forward(acts.up_in[l - 1], t1, s);
      std::swap(h, t1);
    }
  }

  out_gn_.forward(h, t1, acts.out_gnc);
  silu_forward(t1, acts.out_head_in);
  out_conv_.forward(acts.out_head_in, eps_out, s);
}

void UNet::backward(const Tensor& g_eps, Acts& acts, double* gflat, Scratch& s) const {
  Tensor gh, gt;
  Tensor g_silu_temb(cfg_.time_dim, 1, 1);

  // output head
  gh.resize(acts.out_head_in.c, acts.out_head_in.h, acts.out_head_in.w);
  out_conv_.backward(acts.out_head_in, g_eps, &gh, gflat, s);
  out_gn_.apply_affine(acts.out_gnc.xhat, s.tmp[7]);
  gt.resize(gh.c, gh.h, gh.w);
  silu_backward(s.tmp[7], gh, gt);
  gh.resize(gt.c, gt.h, gt.w);
  out_gn_.backward(gt, acts.out_gnc, gh, gflat);

  std::array<Tensor, 4> g_skip;

  // decoder, reverse order (levels 0 .. 3)
  for (int l = 0; l < 4; ++l) {
    if (l > 0) {
      // invert the up step that produced level l-1's pre-concat input
      gt.resize(acts.up_in[l - 1].c, acts.up_in[l - 1].h, acts.up_in[l - 1].w);
      up_[l - 1].backward(acts.up_in[l - 1], gh, &gt, gflat, s);
      const Tensor& ref = acts.dec_rb[l][1].x_in;  // level-l post-rb shape
      gh.resize(ref.c, ref.h, ref.w);
      upsample_nearest2_backward(gt, gh);
    }
    for (int b = 1; b >= 0; --b) {
      if (l == 3) {
        gt.resize(dec_attn_[b].channels, gh.h, gh.w);
        dec_attn_[b].backward(gh, acts.dec_attn[b], gt, gflat, s);
        std::swap(gh, gt);
      }
      const Tensor& rin = acts.dec_rb[l][b].x_in;
      gt.resize(rin.c, rin.h, rin.w);
      dec_rb_[l][b].backward(gh, acts.dec_rb[l][b], acts.silu_temb, gt, g_silu_temb, gflat, s);
      std::swap(gh, gt);
    }
    // split concat gradient: leading channels continue up the chain,
    // trailing channels feed the encoder skip
    const int skip_ch = acts.skip[l].c;
    const int head_ch = gh.c - skip_ch;
    g_skip[l].resize(skip_ch, gh.h, gh.w);
    std::memcpy(g_skip[l].data(), gh.data() + static_cast<size_t>(head_ch) * gh.pixels(),
                g_skip[l].size() * sizeof(double));
    gt.resize(head_ch, gh.h, gh.w);
    std::memcpy(gt.data(), gh.data(), gt.size() * sizeof(double));
    std::swap(gh, gt);
  }
  // gh now holds the gradient w.r.t. the bottleneck output

  {
    const Tensor& rin = acts.mid_rb2_acts.x_in;
    gt.resize(rin.c, rin.h, rin.w);
    mid_rb2_.backward(gh, acts.mid_rb2_acts, acts.silu_temb, gt, g_silu_temb, gflat, s);
    std::swap(gh, gt);
    gt.resize(gh.c, gh.h, gh.w);
    mid_attn_.backward(gh, acts.mid_attn_acts, gt, gflat, s);
    std::swap(gh, gt);
    const Tensor& rin1 = acts.mid_rb1_acts.x_in;
    gt.resize(rin1.c, rin1.h, rin1.w);
    mid_rb1_.backward(gh, acts.mid_rb1_acts, acts.silu_temb, gt, g_silu_temb, gflat, s);
    std::swap(gh, gt);
  }

  // encoder, reverse order (levels 3 .. 0)
  for (int l = 3; l >= 0; --l) {
    if (l < 3) {
      gt.resize(acts.skip[l].c, acts.skip[l].h, acts.skip[l].w);
      down_[l].backward(acts.skip[l], gh, &gt, gflat, s);
      std::swap(gh, gt);
    }
    for (size_t i = 0; i < gh.size(); ++i) gh.v[i] += g_skip[l].v[i];
    for (int b = 1; b >= 0; --b) {
      if (l == 3) {
        gt.resize(enc_attn_[b].channels, gh.h, gh.w);
        enc_attn_[b].backward(gh, acts.enc_attn[b], gt, gflat, s);
        std::swap(gh, gt);
      }
      const Tensor& rin = acts.enc_rb[l][b].x_in;
      gt.resize(rin.c, rin.h, rin.w);
      enc_rb_[l][b].backward(gh, acts.enc_rb[l][b], acts.silu_temb, gt, g_silu_temb, gflat, s);
      std::swap(gh, gt);
    }
  }

  conv_in_.backward(acts.x_in, gh, nullptr, gflat, s);

  // shared time path
  gt.resize(cfg_.time_dim, 1, 1);
  silu_backward(acts.temb, g_silu_temb, gt);
  Tensor g_a1(cfg_.time_dim, 1, 1);
  temb_lin2_.backward(acts.temb_a1, gt, &g_a1, gflat);
  gt.resize(cfg_.time_dim, 1, 1);
  silu_backward(acts.temb_z1, g_a1, gt);
  temb_lin1_.backward(acts.temb_sin, gt, nullptr, gflat);
}

GridF UNet::predict(const GridF& x_t, int t) const {
  thread_local Acts acts;
  thread_local Scratch scratch;
  Tensor x(1, x_t.rows(), x_t.cols());
  std::memcpy(x.data(), x_t.data(), x.size() * sizeof(double));
  Tensor out;
  forward(x, t, out, acts, scratch);
  GridF result(x_t.rows(), x_t.cols());
  std::memcpy(result.data(), out.data(), out.size() * sizeof(double));
  return result;
}

void UNet::export_flat(std::vector<double>& out) const {
  out.resize(store_.total_size());
  for (const Param& p : store_.items())
    std::memcpy(out.data() + p.offset, p.value.data(), p.value.size() * sizeof(double));
}

void UNet::import_flat(const std::vector<double>& in) {
  if (in.size() != store_.total_size()) throw std::invalid_argument("import_flat: size mismatch");
  for (Param& p : store_.items())
    std::memcpy(p.value.data(), in.data() + p.offset, p.value.size() * sizeof(double));
}

}  // namespace specrec::nn
