// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
//
// specrec: synthesize RSSI feature spectra under an air-to-ground channel,
// inject jamming attacks, train the diffusion denoiser, reconstruct
// attacked spectra, and evaluate SSIM recovery.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "specrec/config.hpp"
#include "specrec/corpus.hpp"
#include "specrec/dataset.hpp"
#include "specrec/diffusion.hpp"
#include "specrec/errors.hpp"
#include "specrec/metrics.hpp"
#include "specrec/nn/checkpoint.hpp"
#include "specrec/nn/train.hpp"
#include "specrec/nn/unet.hpp"
#include "specrec/render.hpp"
#include "specrec/rng.hpp"

namespace {

using namespace specrec;

int log_level() {
  const char* env = std::getenv("SPECREC_LOG");
  if (!env) return 1;
  return std::atoi(env);
}

void log_config(const ScenarioConfig& cfg) {
  if (log_level() >= 1) std::cerr << "# resolved scenario config\n" << scenario_to_text(cfg);
}

struct CommonOpts {
  std::string config_path;
  std::string workdir;
  std::vector<std::string> overrides;  // section.key=value
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "scenario config file (sectioned key = value)");
  cmd->add_option("--workdir", opts.workdir, "directory all relative paths resolve against");
  cmd->add_option("--set", opts.overrides, "override a config key, e.g. --set attack.probability=0.5")
      ->type_name("KEY=VALUE");
}

ScenarioConfig resolve_config(const CommonOpts& opts) {
  if (!opts.workdir.empty()) std::filesystem::current_path(opts.workdir);
  ConfigKv kv;
  std::string origin = "<defaults>";
  if (!opts.config_path.empty()) {
    kv = load_config_file(opts.config_path);
    origin = opts.config_path;
  }
  for (const std::string& item : opts.overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("config error (--set): expected KEY=VALUE, got '" + item + "'");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return scenario_from_kv(kv, origin);
}

NoiseSchedule default_schedule() { return NoiseSchedule::linear(); }

std::vector<ScenarioCell> parse_scenarios(const std::string& text) {
  if (text.empty() || text == "all") return default_scenario_cells();
  std::vector<ScenarioCell> cells;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("config error (--scenarios): expected MODE:P, got '" + item + "'");
    ScenarioCell cell;
    const std::string mode = item.substr(0, colon);
    if (mode == "ground") cell.mode = AttackMode::Ground;
    else if (mode == "airborne") cell.mode = AttackMode::Airborne;
    else throw ConfigError("config error (--scenarios): unknown mode '" + mode + "'");
    cell.p = std::strtod(item.c_str() + colon + 1, nullptr);
    if (cell.p < 0.0 || cell.p > 1.0)
      throw ConfigError("config error (--scenarios): probability outside [0, 1] in '" + item + "'");
    cells.push_back(cell);
  }
  if (cells.empty()) throw ConfigError("config error (--scenarios): empty list");
  return cells;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open output file for writing: " + path);
  f << text;
  if (!f) throw IoError("write failed: " + path);
}

// ----------------------------------------------------------- subcommands

int cmd_gen_dataset(const CommonOpts& common, std::uint64_t count, std::uint64_t seed,
                    const std::string& out_dir, bool with_attacks) {
  ScenarioConfig cfg = resolve_config(common);
  log_config(cfg);
  Manifest m = generate_corpus(cfg, count, seed, out_dir, with_attacks);
  if (log_level() >= 1)
    std::cerr << "wrote " << m.count << " records to " << out_dir << " (manifest.txt, scenario.cfg)\n";
  return 0;
}

int cmd_train(const CommonOpts& common, const std::string& corpus, const std::string& out,
              const nn::TrainConfig& tc, int channels, int time_dim) {
  if (!common.workdir.empty()) std::filesystem::current_path(common.workdir);
  const Manifest manifest = load_manifest(corpus);
  const std::vector<GridF> clean = load_normalized_clean_set(corpus);
  if (log_level() >= 1)
    std::cerr << "corpus: " << clean.size() << " maps " << manifest.rows << "x" << manifest.cols << "\n";

  nn::UNetConfig ucfg;
  ucfg.base_channels = channels;
  ucfg.time_dim = time_dim;
  nn::UNet model(ucfg);
  model.init_params(tc.seed);

  const NoiseSchedule schedule = default_schedule();
  nn::CheckpointSink sink;
  sink.path = out;
  sink.normalization = manifest.normalization;
  std::ostream* log = log_level() >= 1 ? &std::cerr : nullptr;
  nn::TrainResult result = nn::train_denoiser(model, clean, schedule, tc, &sink, log);

  std::ostringstream trace;
  trace.precision(10);
  for (double v : result.loss_trace) trace << v << "\n";
  write_text_file(out + ".loss.txt", trace.str());
  if (log_level() >= 1) std::cerr << "checkpoint written to " << out << "\n";
  return 0;
}

int cmd_attack(const CommonOpts& common, const std::string& input, const std::string& out,
               const std::string& mask_out, std::optional<std::uint64_t> seed_flag,
               std::optional<double> p_flag, std::optional<std::string> mode_flag) {
  ScenarioConfig cfg = resolve_config(common);
  if (seed_flag) cfg.seed = *seed_flag;
  if (p_flag) cfg.attack.attack_probability = *p_flag;
  if (mode_flag) {
    if (*mode_flag == "ground") cfg.attack.mode = AttackMode::Ground;
    else if (*mode_flag == "airborne") cfg.attack.mode = AttackMode::Airborne;
    else throw ConfigError("config error (--mode): must be 'ground' or 'airborne'");
  }
  cfg.validate();
  log_config(cfg);

  RssiMap clean;
  clean.values_dbm = load_grid(input);
  clean.grid = cfg.grid;
  clean.kind = MapKind::Clean;
  if (!clean.values_dbm.same_shape(cfg.grid.rows, cfg.grid.cols))
    throw ConfigError("config error: input grid dimensions do not match scenario grid");

  AttackScenario scenario = cfg.attack;
  scenario.seed = cfg.seed;
  Transmitter tx = cfg.tx;
  tx.position_m = cfg.effective_tx_position();
  const AttackMask mask = sample_attack_mask(scenario.attack_probability, cfg.grid, cfg.seed);
  const GridF interference = interference_map(scenario, tx, cfg.grid, cfg.channel);
  const RssiMap attacked = inject(clean, mask, interference);

  save_grid(out, attacked.values_dbm);
  if (!mask_out.empty()) save_mask(mask_out, mask.attacked);
  return 0;
}

int cmd_reconstruct(const CommonOpts& common, const std::string& model_path, const std::string& input,
                    const std::string& out, std::optional<int> t_star, std::optional<int> rounds,
                    std::optional<int> lowpass_n, bool no_guidance, std::optional<std::uint64_t> seed_flag) {
  ScenarioConfig cfg = resolve_config(common);
  if (seed_flag) cfg.seed = *seed_flag;
  if (t_star) cfg.diffusion.t_star = *t_star;
  if (rounds) cfg.diffusion.rounds = *rounds;
  if (lowpass_n) cfg.diffusion.lowpass_factor = *lowpass_n;
  if (no_guidance) cfg.diffusion.guidance_enabled = false;
  log_config(cfg);

  nn::CheckpointMeta meta;
  const auto model = nn::load_checkpoint(model_path, meta);
  const NoiseSchedule schedule = default_schedule();
  if (meta.schedule_hash != schedule.hash())
    throw ConfigError("config error: checkpoint was trained against a different noise schedule");
  if (common.config_path.empty()) {
    cfg.normalization = meta.normalization;  // defaults defer to the checkpoint
  } else if (meta.normalization.min_dbm != cfg.normalization.min_dbm ||
             meta.normalization.max_dbm != cfg.normalization.max_dbm) {
    throw ConfigError("config error: checkpoint normalization differs from scenario config");
  }

  const GridF attacked_dbm = load_grid(input);
  const GridF y = normalize_values(attacked_dbm, cfg.normalization);
  const GridF recon = guided_reconstruct(y, *model, schedule, cfg.diffusion, cfg.seed);
  save_grid(out, denormalize(recon, cfg.normalization));
  return 0;
}

int cmd_evaluate(const CommonOpts& common, const std::string& model_path, const std::string& scenarios,
                 int seeds, const std::string& out_prefix, std::optional<std::uint64_t> seed_flag,
                 std::optional<int> t_star, std::optional<int> rounds, std::optional<int> lowpass_n,
                 bool no_guidance) {
  ScenarioConfig cfg = resolve_config(common);
  if (seed_flag) cfg.seed = *seed_flag;
  if (t_star) cfg.diffusion.t_star = *t_star;
  if (rounds) cfg.diffusion.rounds = *rounds;
  if (lowpass_n) cfg.diffusion.lowpass_factor = *lowpass_n;
  if (no_guidance) cfg.diffusion.guidance_enabled = false;
  log_config(cfg);

  nn::CheckpointMeta meta;
  const auto model = nn::load_checkpoint(model_path, meta);
  const NoiseSchedule schedule = default_schedule();
  if (meta.schedule_hash != schedule.hash())
    throw ConfigError("config error: checkpoint was trained against a different noise schedule");
  cfg.normalization = meta.normalization;

  const EvalReport report = evaluate_scenarios(*model, cfg, parse_scenarios(scenarios), seeds, schedule,
                                               cfg.diffusion, cfg.seed);
  const std::string table = eval_report_table(report);
  std::cout << table;
  if (!out_prefix.empty()) {
    write_text_file(out_prefix + ".txt", table);
    write_text_file(out_prefix + ".csv", eval_report_csv(report));
  }
  return 0;
}

int cmd_render(const CommonOpts& common, const std::string& input, const std::string& out, int scale,
               std::optional<double> min_dbm, std::optional<double> max_dbm) {
  ScenarioConfig cfg = resolve_config(common);
  NormalizationSpec range = cfg.normalization;
  if (min_dbm) range.min_dbm = *min_dbm;
  if (max_dbm) range.max_dbm = *max_dbm;
  range.validate();
  render_heatmap(out, load_grid(input), range, scale);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"specrec: RSSI feature-spectrum simulation, jamming, and diffusion-based recovery"};
  app.require_subcommand(1);

  // gen-dataset
  CommonOpts gd_common;
  std::uint64_t gd_count = 16, gd_seed = 1;
  std::string gd_out = "corpus";
  bool gd_attacks = false;
  auto* gd = app.add_subcommand("gen-dataset", "synthesize a corpus of spectrum records");
  add_common(gd, gd_common);
  gd->add_option("--count", gd_count, "number of records")->check(CLI::PositiveNumber);
  gd->add_option("--seed", gd_seed, "base seed; record i derives from (seed, i)");
  gd->add_option("--out-dir", gd_out, "output directory");
  gd->add_flag("--with-attacks", gd_attacks, "also store attacked maps and masks");

  // train
  CommonOpts tr_common;
  std::string tr_corpus, tr_out = "model.ckpt";
  nn::TrainConfig tc;
  int tr_channels = 64, tr_time_dim = 256;
  auto* tr = app.add_subcommand("train", "train the diffusion denoiser on clean spectra");
  add_common(tr, tr_common);
  tr->add_option("--corpus", tr_corpus, "corpus manifest file")->required();
  tr->add_option("--out", tr_out, "checkpoint output path");
  tr->add_option("--steps", tc.steps, "optimizer steps");
  tr->add_option("--batch", tc.batch, "batch size");
  tr->add_option("--lr", tc.lr, "learning rate");
  tr->add_option("--seed", tc.seed, "training seed");
  tr->add_option("--ema", tc.ema_decay, "EMA decay (0 disables)");
  tr->add_option("--crop", tc.crop, "train on random square crops of this size (0 = full maps)");
  tr->add_option("--checkpoint-every", tc.checkpoint_every, "checkpoint cadence in steps (0 = final only)");
  tr->add_option("--channels", tr_channels, "U-Net base channel width");
  tr->add_option("--time-dim", tr_time_dim, "time embedding dimension");

  // attack
  CommonOpts at_common;
  std::string at_in, at_out = "attacked.grid", at_mask;
  std::optional<std::uint64_t> at_seed;
  std::optional<double> at_p;
  std::optional<std::string> at_mode;
  auto* at = app.add_subcommand("attack", "inject jamming interference into a clean map");
  add_common(at, at_common);
  at->add_option("--input", at_in, "clean map (.grid)")->required();
  at->add_option("--out", at_out, "attacked map output path");
  at->add_option("--mask-out", at_mask, "also store the attack mask");
  at->add_option("--seed", at_seed, "scenario seed override");
  at->add_option("--p", at_p, "attack probability override");
  at->add_option("--mode", at_mode, "attack mode override: ground | airborne");

  // reconstruct
  CommonOpts rc_common;
  std::string rc_model, rc_in, rc_out = "reconstructed.grid";
  std::optional<int> rc_tstar, rc_rounds, rc_lowpass;
  std::optional<std::uint64_t> rc_seed;
  bool rc_nog = false;
  auto* rc = app.add_subcommand("reconstruct", "denoise an attacked map with the trained model");
  add_common(rc, rc_common);
  rc->add_option("--model", rc_model, "model checkpoint")->required();
  rc->add_option("--input", rc_in, "attacked map (.grid)")->required();
  rc->add_option("--out", rc_out, "reconstructed map output path");
  rc->add_option("--t-star", rc_tstar, "partial forward depth");
  rc->add_option("--rounds", rc_rounds, "forward-reverse rounds");
  rc->add_option("--lowpass", rc_lowpass, "guidance lowpass factor");
  rc->add_flag("--no-guidance", rc_nog, "disable low-frequency guidance");
  rc->add_option("--seed", rc_seed, "reconstruction seed");

  // evaluate
  CommonOpts ev_common;
  std::string ev_model, ev_scen = "all", ev_out;
  int ev_seeds = 10;
  std::optional<std::uint64_t> ev_seed;
  std::optional<int> ev_tstar, ev_rounds, ev_lowpass;
  bool ev_nog = false;
  auto* ev = app.add_subcommand("evaluate", "SSIM/MSE report over attack scenarios");
  add_common(ev, ev_common);
  ev->add_option("--model", ev_model, "model checkpoint")->required();
  ev->add_option("--scenarios", ev_scen, "'all' or list like ground:0.3,airborne:0.5");
  ev->add_option("--seeds", ev_seeds, "evaluation seeds per scenario")->check(CLI::PositiveNumber);
  ev->add_option("--out", ev_out, "report path prefix (writes .txt and .csv)");
  ev->add_option("--seed", ev_seed, "evaluation base seed");
  ev->add_option("--t-star", ev_tstar, "partial forward depth");
  ev->add_option("--rounds", ev_rounds, "forward-reverse rounds");
  ev->add_option("--lowpass", ev_lowpass, "guidance lowpass factor");
  ev->add_flag("--no-guidance", ev_nog, "disable low-frequency guidance");

  // render
  CommonOpts rd_common;
  std::string rd_in, rd_out = "map.bmp";
  int rd_scale = 1;
  std::optional<double> rd_min, rd_max;
  auto* rd = app.add_subcommand("render", "render a map as a BMP heatmap with a fixed color scale");
  add_common(rd, rd_common);
  rd->add_option("--input", rd_in, "map file (.grid)")->required();
  rd->add_option("--out", rd_out, "image output path");
  rd->add_option("--scale", rd_scale, "pixels per cell")->check(CLI::PositiveNumber);
  rd->add_option("--min", rd_min, "color scale lower bound, dBm");
  rd->add_option("--max", rd_max, "color scale upper bound, dBm");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*gd) return cmd_gen_dataset(gd_common, gd_count, gd_seed, gd_out, gd_attacks);
    if (*tr) return cmd_train(tr_common, tr_corpus, tr_out, tc, tr_channels, tr_time_dim);
    if (*at) return cmd_attack(at_common, at_in, at_out, at_mask, at_seed, at_p, at_mode);
    if (*rc) return cmd_reconstruct(rc_common, rc_model, rc_in, rc_out, rc_tstar, rc_rounds, rc_lowpass,
                                    rc_nog, rc_seed);
    if (*ev) return cmd_evaluate(ev_common, ev_model, ev_scen, ev_seeds, ev_out, ev_seed, ev_tstar,
                                 ev_rounds, ev_lowpass, ev_nog);
    if (*rd) return cmd_render(rd_common, rd_in, rd_out, rd_scale, rd_min, rd_max);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
