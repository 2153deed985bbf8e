// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_NN_TENSOR_HPP
#define SPECREC_NN_TENSOR_HPP

#include <cstddef>
#include <cstdlib>
#include <deque>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

namespace specrec::nn {

// 64-byte-aligned storage keeps SIMD kernels on one code path regardless
// of where the heap places a buffer, which keeps floating-point results
// bit-stable across repeated runs in one process.
template <typename T, std::size_t Align>
struct AlignedAllocator {
  using value_type = T;
  template <typename U>
  struct rebind {
    using other = AlignedAllocator<U, Align>;
  };
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U, Align>&) {}
  T* allocate(std::size_t n) {
    void* p = std::aligned_alloc(Align, ((n * sizeof(T) + Align - 1) / Align) * Align);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { std::free(p); }
  template <typename U>
  bool operator==(const AlignedAllocator<U, Align>&) const {
    return true;
  }
};

using AlignedVec = std::vector<double, AlignedAllocator<double, 64>>;

// (channels, height, width) row-major; vectors use (n, 1, 1). All compute
// runs in double so finite-difference gradient checks are meaningful.
struct Tensor {
  int c = 0, h = 0, w = 0;
  AlignedVec v;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, double fill = 0.0)
      : c(c_), h(h_), w(w_), v(static_cast<size_t>(c_) * h_ * w_, fill) {}

  size_t size() const { return v.size(); }
  int pixels() const { return h * w; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  double& at(int ci, int y, int x) { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }
  double at(int ci, int y, int x) const { return v[(static_cast<size_t>(ci) * h + y) * w + x]; }

  void resize(int c_, int h_, int w_) {
    c = c_;
    h = h_;
    w = w_;
    v.assign(static_cast<size_t>(c_) * h_ * w_, 0.0);
  }
  void zero() { std::fill(v.begin(), v.end(), 0.0); }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
};

struct Param {
  std::string name;
  Tensor value;
  size_t offset = 0;  // position in the flat gradient vector
};

// Owns every trainable tensor of a model; registration order fixes the
// flat layout used by gradients, the optimizer, and checkpoints.
class ParamStore {
 public:
  Param* add(const std::string& name, int c, int h, int w) {
    params_.push_back(Param{name, Tensor(c, h, w), total_});
    total_ += params_.back().value.size();
    return &params_.back();
  }
  size_t total_size() const { return total_; }
  std::deque<Param>& items() { return params_; }
  const std::deque<Param>& items() const { return params_; }

 private:
  std::deque<Param> params_;  // stable addresses
  size_t total_ = 0;
};

}  // namespace specrec::nn

#endif  // SPECREC_NN_TENSOR_HPP
