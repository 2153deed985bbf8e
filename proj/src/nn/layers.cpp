// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#define EIGEN_DONT_PARALLELIZE
#include "specrec/nn/layers.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace specrec::nn {

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

double silu(double z) {
  const double s = 1.0 / (1.0 + std::exp(-z));
  return z * s;
}

double silu_grad(double z) {
  const double s = 1.0 / (1.0 + std::exp(-z));
  return s * (1.0 + z * (1.0 - s));
}

void silu_forward(const Tensor& x, Tensor& y) {
  y.resize(x.c, x.h, x.w);
  for (size_t i = 0; i < x.size(); ++i) y.v[i] = silu(x.v[i]);
}

void silu_backward(const Tensor& x, const Tensor& gy, Tensor& gx) {
  for (size_t i = 0; i < x.size(); ++i) gx.v[i] += gy.v[i] * silu_grad(x.v[i]);
}

// ---------------------------------------------------------------- Conv2d

void Conv2d::build(ParamStore& store, const std::string& name, int cin_, int cout_, int k_, int stride_,
                   int pad_) {
  cin = cin_;
  cout = cout_;
  k = k_;
  stride = stride_;
  pad = pad_;
  W = store.add(name + ".weight", cout, cin * k * k, 1);
  b = store.add(name + ".bias", cout, 1, 1);
}

namespace {

void im2col(const Tensor& x, int k, int stride, int pad, int oh, int ow, AlignedVec& cols) {
  const int cin = x.c, h = x.h, w = x.w;
  cols.assign(static_cast<size_t>(cin) * k * k * oh * ow, 0.0);
  const int npix = oh * ow;
  for (int ci = 0; ci < cin; ++ci) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        double* dst = cols.data() + (static_cast<size_t>((ci * k + ki) * k + kj)) * npix;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ki - pad;
          if (iy < 0 || iy >= h) continue;
          const double* src = x.data() + (static_cast<size_t>(ci) * h + iy) * w;
          double* drow = dst + static_cast<size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kj - pad;
            if (ix >= 0 && ix < w) drow[ox] = src[ix];
          }
        }
      }
    }
  }
}

void col2im_add(const AlignedVec& cols, int cin, int k, int stride, int pad, int oh, int ow,
                Tensor& gx) {
  const int h = gx.h, w = gx.w;
  const int npix = oh * ow;
  for (int ci = 0; ci < cin; ++ci) {
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const double* src = cols.data() + (static_cast<size_t>((ci * k + ki) * k + kj)) * npix;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride + ki - pad;
          if (iy < 0 || iy >= h) continue;
          double* dst = gx.data() + (static_cast<size_t>(ci) * h + iy) * w;
          const double* srow = src + static_cast<size_t>(oy) * ow;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride + kj - pad;
            if (ix >= 0 && ix < w) dst[ix] += srow[ox];
          }
        }
      }
    }
  }
}

}  // namespace

void Conv2d::forward(const Tensor& x, Tensor& y, Scratch& s) const {
  if (x.c != cin) throw std::invalid_argument("Conv2d: channel mismatch");
  const int oh = out_h(x.h), ow = out_w(x.w);
  y.resize(cout, oh, ow);
  const int npix = oh * ow;
  CMatMap Wm(W->value.data(), cout, cin * k * k);

  if (k == 1 && stride == 1) {
    CMatMap X(x.data(), cin, npix);
    MatMap Y(y.data(), cout, npix);
    Y.noalias() = Wm * X;
  } else {
    im2col(x, k, stride, pad, oh, ow, s.cols);
    CMatMap C(s.cols.data(), cin * k * k, npix);
    MatMap Y(y.data(), cout, npix);
    Y.noalias() = Wm * C;
  }
  for (int co = 0; co < cout; ++co) {
    const double bias = b->value.v[co];
    double* row = y.data() + static_cast<size_t>(co) * npix;
    for (int i = 0; i < npix; ++i) row[i] += bias;
  }
}

void Conv2d::backward(const Tensor& x, const Tensor& gy, Tensor* gx, double* gflat, Scratch& s) const {
  const int oh = gy.h, ow = gy.w;
  const int npix = oh * ow;
  CMatMap Gy(gy.data(), cout, npix);
  MatMap gW(gflat + W->offset, cout, cin * k * k);
  for (int co = 0; co < cout; ++co) {
    const double* row = gy.data() + static_cast<size_t>(co) * npix;
    double sum = 0.0;
    for (int i = 0; i < npix; ++i) sum += row[i];
    gflat[b->offset + co] += sum;
  }

  if (k == 1 && stride == 1) {
    CMatMap X(x.data(), cin, npix);
    gW.noalias() += Gy * X.transpose();
    if (gx) {
      CMatMap Wm(W->value.data(), cout, cin * k * k);
      MatMap Gx(gx->data(), cin, npix);
      Gx.noalias() += Wm.transpose() * Gy;
    }
    return;
  }

  im2col(x, k, stride, pad, oh, ow, s.cols);
  CMatMap C(s.cols.data(), cin * k * k, npix);
  gW.noalias() += Gy * C.transpose();
  if (gx) {
    s.cols2.assign(static_cast<size_t>(cin) * k * k * npix, 0.0);
    MatMap Gc(s.cols2.data(), cin * k * k, npix);
    CMatMap Wm(W->value.data(), cout, cin * k * k);
    Gc.noalias() = Wm.transpose() * Gy;
    col2im_add(s.cols2, cin, k, stride, pad, oh, ow, *gx);
  }
}

// ---------------------------------------------------------------- Linear

void Linear::build(ParamStore& store, const std::string& name, int in_, int out_) {
  in = in_;
  out = out_;
  W = store.add(name + ".weight", out, in, 1);
  b = store.add(name + ".bias", out, 1, 1);
}

void Linear::forward(const Tensor& x, Tensor& y) const {
  y.resize(out, 1, 1);
  CMatMap Wm(W->value.data(), out, in);
  CMatMap X(x.data(), in, 1);
  MatMap Y(y.data(), out, 1);
  Y.noalias() = Wm * X;
  for (int i = 0; i < out; ++i) y.v[i] += b->value.v[i];
}

void Linear::backward(const Tensor& x, const Tensor& gy, Tensor* gx, double* gflat) const {
  CMatMap Gy(gy.data(), out, 1);
  CMatMap X(x.data(), in, 1);
  MatMap gW(gflat + W->offset, out, in);
  gW.noalias() += Gy * X.transpose();
  for (int i = 0; i < out; ++i) gflat[b->offset + i] += gy.v[i];
  if (gx) {
    CMatMap Wm(W->value.data(), out, in);
    MatMap Gx(gx->data(), in, 1);
    Gx.noalias() += Wm.transpose() * Gy;
  }
}

// -------------------------------------------------------------- GroupNorm

void GroupNorm::build(ParamStore& store, const std::string& name, int channels_, int groups_) {
  channels = channels_;
  groups = groups_;
  if (channels % groups != 0) throw std::invalid_argument("GroupNorm: channels must divide into groups");
  gamma = store.add(name + ".gamma", channels, 1, 1);
  beta = store.add(name + ".beta", channels, 1, 1);
  for (int i = 0; i < channels; ++i) gamma->value.v[i] = 1.0;
}

void GroupNorm::forward(const Tensor& x, Tensor& y, Cache& cache) const {
  if (x.c != channels) throw std::invalid_argument("GroupNorm: channel mismatch");
  const int per = channels / groups;
  const size_t gsize = static_cast<size_t>(per) * x.pixels();
  y.resize(x.c, x.h, x.w);
  cache.xhat.resize(x.c, x.h, x.w);
  cache.invstd.assign(groups, 0.0);
  for (int g = 0; g < groups; ++g) {
    const double* xs = x.data() + g * gsize;
    double sum = 0.0, sq = 0.0;
    for (size_t i = 0; i < gsize; ++i) {
      sum += xs[i];
      sq += xs[i] * xs[i];
    }
    const double mean = sum / static_cast<double>(gsize);
    const double var = sq / static_cast<double>(gsize) - mean * mean;
    const double invstd = 1.0 / std::sqrt(var + eps);
    cache.invstd[g] = invstd;
    double* xh = cache.xhat.data() + g * gsize;
    for (size_t i = 0; i < gsize; ++i) xh[i] = (xs[i] - mean) * invstd;
  }
  apply_affine(cache.xhat, y);
}

void GroupNorm::apply_affine(const Tensor& xhat, Tensor& y) const {
  y.resize(xhat.c, xhat.h, xhat.w);
  const int npix = xhat.pixels();
  for (int ci = 0; ci < channels; ++ci) {
    const double g = gamma->value.v[ci], bt = beta->value.v[ci];
    const double* xh = xhat.data() + static_cast<size_t>(ci) * npix;
    double* ys = y.data() + static_cast<size_t>(ci) * npix;
    for (int i = 0; i < npix; ++i) ys[i] = g * xh[i] + bt;
  }
}

void GroupNorm::backward(const Tensor& gy, const Cache& cache, Tensor& gx, double* gflat) const {
  const int per = channels / groups;
  const int npix = gy.pixels();
  const size_t gsize = static_cast<size_t>(per) * npix;

  for (int ci = 0; ci < channels; ++ci) {
    const double* gys = gy.data() + static_cast<size_t>(ci) * npix;
    const double* xh = cache.xhat.data() + static_cast<size_t>(ci) * npix;
    double sg = 0.0, sb = 0.0;
    for (int i = 0; i < npix; ++i) {
      sg += gys[i] * xh[i];
      sb += gys[i];
    }
    gflat[gamma->offset + ci] += sg;
    gflat[beta->offset + ci] += sb;
  }

  for (int g = 0; g < groups; ++g) {
    const double* xh = cache.xhat.data() + g * gsize;
    const double* gys = gy.data() + g * gsize;
    double sum_gxh = 0.0, sum_gxh_xh = 0.0;
    for (int ci = 0; ci < per; ++ci) {
      const double gm = gamma->value.v[g * per + ci];
      const double* gc = gys + static_cast<size_t>(ci) * npix;
      const double* xc = xh + static_cast<size_t>(ci) * npix;
      for (int i = 0; i < npix; ++i) {
        const double gxh = gm * gc[i];
        sum_gxh += gxh;
        sum_gxh_xh += gxh * xc[i];
      }
    }
    const double inv_m = 1.0 / static_cast<double>(gsize);
    const double invstd = cache.invstd[g];
    double* gxs = gx.data() + g * gsize;
    for (int ci = 0; ci < per; ++ci) {
      const double gm = gamma->value.v[g * per + ci];
      const double* gc = gys + static_cast<size_t>(ci) * npix;
      const double* xc = xh + static_cast<size_t>(ci) * npix;
      double* gxc = gxs + static_cast<size_t>(ci) * npix;
      for (int i = 0; i < npix; ++i)
        gxc[i] += invstd * (gm * gc[i] - inv_m * (sum_gxh + xc[i] * sum_gxh_xh));
    }
  }
}

// -------------------------------------------------------------- Upsample

void upsample_nearest2(const Tensor& x, Tensor& y) {
  y.resize(x.c, x.h * 2, x.w * 2);
  for (int ci = 0; ci < x.c; ++ci)
    for (int yy = 0; yy < y.h; ++yy) {
      const double* src = x.data() + (static_cast<size_t>(ci) * x.h + yy / 2) * x.w;
      double* dst = y.data() + (static_cast<size_t>(ci) * y.h + yy) * y.w;
      for (int xx = 0; xx < y.w; ++xx) dst[xx] = src[xx / 2];
    }
}

void upsample_nearest2_backward(const Tensor& gy, Tensor& gx) {
  for (int ci = 0; ci < gx.c; ++ci)
    for (int yy = 0; yy < gy.h; ++yy) {
      const double* src = gy.data() + (static_cast<size_t>(ci) * gy.h + yy) * gy.w;
      double* dst = gx.data() + (static_cast<size_t>(ci) * gx.h + yy / 2) * gx.w;
      for (int xx = 0; xx < gy.w; ++xx) dst[xx / 2] += src[xx];
    }
}

void sinusoidal_embedding(int t, int dim, Tensor& out) {
  if (dim % 2 != 0) throw std::invalid_argument("sinusoidal_embedding: dim must be even");
  const int half = dim / 2;
  out.resize(dim, 1, 1);
  const double denom = half > 1 ? half - 1 : 1;
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / denom);
    out.v[i] = std::sin(t * freq);
    out.v[half + i] = std::cos(t * freq);
  }
}

}  // namespace specrec::nn
