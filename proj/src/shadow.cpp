// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/shadow.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "specrec/rng.hpp"

namespace specrec {

namespace {
// FFTW's planner is not thread-safe; every plan create/destroy goes
// through this lock. fftw_execute on distinct plans needs no lock.
std::mutex& planner_mutex() {
  static std::mutex mu;
  return mu;
}
}  // namespace

double shadow_covariance(double d_m, double sigma_db, double dcorr_m) {
  if (d_m < 0.0) throw std::domain_error("shadow_covariance: distance must be >= 0");
  if (dcorr_m <= 0.0) throw std::domain_error("shadow_covariance: dcorr_m must be > 0");
  return sigma_db * sigma_db * std::exp(-d_m / dcorr_m);
}

namespace {

struct Embedding {
  int mr = 0, mc = 0;            // padded torus dimensions (2x the request)
  std::vector<double> sqrt_lam;  // sqrt of clamped eigenvalues, unit sigma
  double clamped_mass = 0.0;
};

// Eigenvalues of the unit-variance exponential kernel on the padded torus:
// the 2D DFT of cov(d_torus). With 2x padding every in-window lag keeps its
// true Euclidean distance, so the target covariance is matched exactly
// wherever the embedding is nonnegative-definite.
Embedding build_embedding(int rows, int cols, double cell_size_m, double dcorr_m) {
  Embedding e;
  e.mr = 2 * rows;
  e.mc = 2 * cols;
  const size_t m = static_cast<size_t>(e.mr) * e.mc;

  fftw_complex* buf = fftw_alloc_complex(m);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(e.mr, e.mc, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }

  for (int i = 0; i < e.mr; ++i) {
    const int di = std::min(i, e.mr - i);
    for (int j = 0; j < e.mc; ++j) {
      const int dj = std::min(j, e.mc - j);
      const double d = cell_size_m * std::sqrt(double(di) * di + double(dj) * dj);
      buf[static_cast<size_t>(i) * e.mc + j][0] = std::exp(-d / dcorr_m);
      buf[static_cast<size_t>(i) * e.mc + j][1] = 0.0;
    }
  }
  fftw_execute(plan);

  e.sqrt_lam.resize(m);
  double neg = 0.0, tot = 0.0;
  for (size_t k = 0; k < m; ++k) {
    const double lam = buf[k][0];  // real by symmetry
    tot += std::abs(lam);
    if (lam < 0.0) {
      neg += -lam;
      e.sqrt_lam[k] = 0.0;
    } else {
      e.sqrt_lam[k] = std::sqrt(lam);
    }
  }
  e.clamped_mass = tot > 0.0 ? neg / tot : 0.0;

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return e;
}

const Embedding& cached_embedding(int rows, int cols, double cell_size_m, double dcorr_m) {
  using Key = std::tuple<int, int, double, double>;
  static std::map<Key, Embedding> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto [it, inserted] = cache.try_emplace(Key{rows, cols, cell_size_m, dcorr_m});
  if (inserted) it->second = build_embedding(rows, cols, cell_size_m, dcorr_m);
  return it->second;
}

}  // namespace

double shadow_embedding_clamped_mass(int rows, int cols, double cell_size_m, double dcorr_m) {
  return cached_embedding(rows, cols, cell_size_m, dcorr_m).clamped_mass;
}

ShadowField sample_shadow_field(int rows, int cols, double cell_size_m, double sigma_db, double dcorr_m,
                                std::uint64_t seed) {
  if (sigma_db < 0.0) throw std::invalid_argument("sample_shadow_field: sigma_db must be >= 0");
  if (dcorr_m <= 0.0) throw std::invalid_argument("sample_shadow_field: dcorr_m must be > 0");

  ShadowField field;
  field.values_db = GridF(rows, cols, 0.0);
  field.sigma_db = sigma_db;
  field.dcorr_m = dcorr_m;
  field.seed = seed;
  if (sigma_db == 0.0) return field;

  const Embedding& e = cached_embedding(rows, cols, cell_size_m, dcorr_m);
  const size_t m = static_cast<size_t>(e.mr) * e.mc;

  fftw_complex* buf = fftw_alloc_complex(m);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(e.mr, e.mc, buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
  }

  // spectral-domain complex Gaussian, one stream per padded-grid cell
  for (int i = 0; i < e.mr; ++i) {
    for (int j = 0; j < e.mc; ++j) {
      const size_t k = static_cast<size_t>(i) * e.mc + j;
      Rng rng(seed, kStreamShadow, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
      buf[k][0] = e.sqrt_lam[k] * rng.normal();
      buf[k][1] = e.sqrt_lam[k] * rng.normal();
    }
  }
  fftw_execute(plan);

  const double scale = sigma_db / std::sqrt(static_cast<double>(m));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      field.values_db.at(r, c) = scale * buf[static_cast<size_t>(r) * e.mc + c][0];

  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return field;
}

}  // namespace specrec
