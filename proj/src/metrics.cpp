// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "specrec/corpus.hpp"
#include "specrec/dataset.hpp"
#include "specrec/rng.hpp"

namespace specrec {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_window() {
  std::vector<double> w(kWindow);
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// separable valid-region convolution with the normalized window
GridF filter_valid(const GridF& x, const std::vector<double>& w) {
  const int rows = x.rows(), cols = x.cols();
  const int out_cols = cols - kWindow + 1, out_rows = rows - kWindow + 1;
  GridF horiz(rows, out_cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += w[k] * x.at(r, c + k);
      horiz.at(r, c) = s;
    }
  }
  GridF out(out_rows, out_cols);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += w[k] * horiz.at(r + k, c);
      out.at(r, c) = s;
    }
  }
  return out;
}

}  // namespace

double ssim(const GridF& a, const GridF& b) {
  if (!b.same_shape(a.rows(), a.cols())) throw std::invalid_argument("ssim: dimension mismatch");
  if (a.rows() < kWindow || a.cols() < kWindow)
    throw std::invalid_argument("ssim: grid smaller than the 11x11 window");

  static const std::vector<double> w = gaussian_window();
  GridF aa(a.rows(), a.cols()), bb(a.rows(), a.cols()), ab(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  const GridF mu_a = filter_valid(a, w);
  const GridF mu_b = filter_valid(b, w);
  const GridF m_aa = filter_valid(aa, w);
  const GridF m_bb = filter_valid(bb, w);
  const GridF m_ab = filter_valid(ab, w);

  double total = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double ma = mu_a[i], mb = mu_b[i];
    const double va = m_aa[i] - ma * ma;
    const double vb = m_bb[i] - mb * mb;
    const double cov = m_ab[i] - ma * mb;
    total += ((2.0 * ma * mb + kC1) * (2.0 * cov + kC2)) / ((ma * ma + mb * mb + kC1) * (va + vb + kC2));
  }
  return total / static_cast<double>(mu_a.size());
}

double mse(const GridF& a, const GridF& b) {
  if (!b.same_shape(a.rows(), a.cols())) throw std::invalid_argument("mse: dimension mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

std::vector<ScenarioCell> default_scenario_cells() {
  std::vector<ScenarioCell> cells;
  for (AttackMode mode : {AttackMode::Ground, AttackMode::Airborne})
    for (double p : {0.3, 0.4, 0.5, 0.6, 0.7}) cells.push_back({mode, p});
  return cells;
}

EvalReport evaluate_scenarios(const NoisePredictor& model, const ScenarioConfig& base,
                              const std::vector<ScenarioCell>& scenarios, int seeds_per_scenario,
                              const NoiseSchedule& schedule, const GuidanceConfig& diffusion_cfg,
                              std::uint64_t base_seed) {
  if (scenarios.empty()) throw std::invalid_argument("evaluate_scenarios: scenario list is empty");
  if (seeds_per_scenario < 1) throw std::invalid_argument("evaluate_scenarios: need at least one seed");

  EvalReport report;
  for (const ScenarioCell& cell : scenarios) {
    ScenarioConfig cfg = base;
    cfg.attack.mode = cell.mode;
    cfg.attack.attack_probability = cell.p;

    EvalRow row;
    row.mode = cell.mode;
    row.p = cell.p;
    row.seed_count = seeds_per_scenario;
    // per-seed results land in fixed slots; the ordered reduction below
    // keeps the report independent of thread count
    std::vector<std::array<double, 4>> per_seed(seeds_per_scenario);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < seeds_per_scenario; ++i) {
      try {
        const std::uint64_t seed = mix(base_seed, kStreamEval, static_cast<std::uint64_t>(i));
        const SpectrumRecord rec = synthesize_record(cfg, seed, /*with_attack=*/true);
        const GridF clean = normalize(rec.clean, cfg.normalization);
        const GridF attacked = normalize(rec.attacked, cfg.normalization);
        const GridF recon = guided_reconstruct(attacked, model, schedule, diffusion_cfg, seed);
        per_seed[i] = {ssim(attacked, clean), ssim(recon, clean), mse(attacked, clean), mse(recon, clean)};
      } catch (...) {
#pragma omp critical
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
    for (const auto& r : per_seed) {
      row.ssim_attacked += r[0];
      row.ssim_reconstructed += r[1];
      row.mse_attacked += r[2];
      row.mse_reconstructed += r[3];
    }
    row.ssim_attacked /= seeds_per_scenario;
    row.ssim_reconstructed /= seeds_per_scenario;
    row.mse_attacked /= seeds_per_scenario;
    row.mse_reconstructed /= seeds_per_scenario;
    row.improvement_pct = 100.0 * (row.ssim_reconstructed - row.ssim_attacked) / row.ssim_attacked;
    report.rows.push_back(row);
  }

  report.min_improvement_pct = std::numeric_limits<double>::infinity();
  report.max_improvement_pct = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const EvalRow& row : report.rows) {
    report.min_improvement_pct = std::min(report.min_improvement_pct, row.improvement_pct);
    report.max_improvement_pct = std::max(report.max_improvement_pct, row.improvement_pct);
    sum += row.improvement_pct;
  }
  report.mean_improvement_pct = sum / static_cast<double>(report.rows.size());
  return report;
}

namespace {
const char* mode_name(AttackMode m) { return m == AttackMode::Ground ? "ground" : "airborne"; }
}  // namespace

std::string eval_report_table(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-9s %-5s %-10s %-10s %-11s %-12s %-12s %-5s\n", "mode", "p",
                "ssim_att", "ssim_rec", "improve_%", "mse_att", "mse_rec", "seeds");
  out << line;
  for (const EvalRow& r : report.rows) {
    std::snprintf(line, sizeof(line), "%-9s %-5.2f %-10.4f %-10.4f %-11.2f %-12.5g %-12.5g %-5d\n",
                  mode_name(r.mode), r.p, r.ssim_attacked, r.ssim_reconstructed, r.improvement_pct,
                  r.mse_attacked, r.mse_reconstructed, r.seed_count);
    out << line;
  }
  std::snprintf(line, sizeof(line), "improvement_pct min %.2f max %.2f mean %.2f\n",
                report.min_improvement_pct, report.max_improvement_pct, report.mean_improvement_pct);
  out << line;
  return out.str();
}

std::string eval_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "mode,p,ssim_attacked,ssim_reconstructed,improvement_pct,mse_attacked,mse_reconstructed,seeds\n";
  out.precision(10);
  for (const EvalRow& r : report.rows) {
    out << mode_name(r.mode) << "," << r.p << "," << r.ssim_attacked << "," << r.ssim_reconstructed << ","
        << r.improvement_pct << "," << r.mse_attacked << "," << r.mse_reconstructed << "," << r.seed_count
        << "\n";
  }
  return out.str();
}

}  // namespace specrec
