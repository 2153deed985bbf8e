// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#include "specrec/config.hpp"

#include "specrec/errors.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace specrec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_fail(const std::string& origin, const std::string& what) {
  throw ConfigError("config error (" + origin + "): " + what);
}

double parse_double(const ConfigKv& kv, const std::string& key, double fallback, const std::string& origin) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(it->second.c_str(), &end);
  if (end == it->second.c_str() || *end != '\0') config_fail(origin, "not a number for key '" + key + "'");
  return v;
}

std::uint64_t parse_u64(const ConfigKv& kv, const std::string& key, std::uint64_t fallback,
                        const std::string& origin) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::uint64_t v = 0;
  const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
    config_fail(origin, "not an unsigned integer for key '" + key + "'");
  return v;
}

int parse_int(const ConfigKv& kv, const std::string& key, int fallback, const std::string& origin) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  int v = 0;
  const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
  if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size())
    config_fail(origin, "not an integer for key '" + key + "'");
  return v;
}

bool parse_bool(const ConfigKv& kv, const std::string& key, bool fallback, const std::string& origin) {
  auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  config_fail(origin, "not a boolean for key '" + key + "'");
}

}  // namespace

ConfigKv parse_config_text(const std::string& text, const std::string& origin) {
  ConfigKv kv;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') config_fail(origin, "unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) config_fail(origin, "empty section name at line " + std::to_string(lineno));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_fail(origin, "expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_fail(origin, "empty key at line " + std::to_string(lineno));
    if (section.empty()) config_fail(origin, "key outside any section at line " + std::to_string(lineno));
    kv[section + "." + key] = value;
  }
  return kv;
}

ConfigKv load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_config_text(buf.str(), path);
}

ScenarioConfig scenario_from_kv(const ConfigKv& kv, const std::string& origin) {
  static const std::map<std::string, int> known = {
      {"grid.rows", 0}, {"grid.cols", 0}, {"grid.cell_size_m", 0}, {"grid.origin_x_m", 0},
      {"grid.origin_y_m", 0}, {"grid.sampling_altitude_m", 0},
      {"tx.x_m", 0}, {"tx.y_m", 0}, {"tx.z_m", 0}, {"tx.power_dbm", 0}, {"tx.frequency_hz", 0},
      {"channel.a_los", 0}, {"channel.b_los", 0}, {"channel.n_los", 0}, {"channel.n_nlos", 0},
      {"channel.ref_distance_m", 0}, {"channel.sf_sigma_db", 0}, {"channel.sf_dcorr_m", 0},
      {"attack.mode", 0}, {"attack.jammer_power_dbm", 0}, {"attack.probability", 0},
      {"attack.ground_x_m", 0}, {"attack.ground_y_m", 0}, {"attack.standoff_m", 0},
      {"attack.jammer_altitude_m", 0},
      {"normalization.min_dbm", 0}, {"normalization.max_dbm", 0},
      {"diffusion.t_star", 0}, {"diffusion.rounds", 0}, {"diffusion.lowpass_factor", 0},
      {"diffusion.guidance", 0},
      {"run.seed", 0}};
  for (const auto& [key, value] : kv)
    if (!known.contains(key)) config_fail(origin, "unknown key '" + key + "'");

  ScenarioConfig cfg;
  cfg.grid.rows = parse_int(kv, "grid.rows", cfg.grid.rows, origin);
  cfg.grid.cols = parse_int(kv, "grid.cols", cfg.grid.cols, origin);
  cfg.grid.cell_size_m = parse_double(kv, "grid.cell_size_m", cfg.grid.cell_size_m, origin);
  cfg.grid.origin_x_m = parse_double(kv, "grid.origin_x_m", cfg.grid.origin_x_m, origin);
  cfg.grid.origin_y_m = parse_double(kv, "grid.origin_y_m", cfg.grid.origin_y_m, origin);
  cfg.grid.sampling_altitude_m =
      parse_double(kv, "grid.sampling_altitude_m", cfg.grid.sampling_altitude_m, origin);

  cfg.tx_position_set = kv.contains("tx.x_m") || kv.contains("tx.y_m") || kv.contains("tx.z_m");
  cfg.tx.position_m.x = parse_double(kv, "tx.x_m", 0.0, origin);
  cfg.tx.position_m.y = parse_double(kv, "tx.y_m", 0.0, origin);
  cfg.tx.position_m.z = parse_double(kv, "tx.z_m", 0.0, origin);
  cfg.tx.power_dbm = parse_double(kv, "tx.power_dbm", cfg.tx.power_dbm, origin);
  cfg.tx.frequency_hz = parse_double(kv, "tx.frequency_hz", cfg.tx.frequency_hz, origin);

  cfg.channel.a_los = parse_double(kv, "channel.a_los", cfg.channel.a_los, origin);
  cfg.channel.b_los = parse_double(kv, "channel.b_los", cfg.channel.b_los, origin);
  cfg.channel.n_los = parse_double(kv, "channel.n_los", cfg.channel.n_los, origin);
  cfg.channel.n_nlos = parse_double(kv, "channel.n_nlos", cfg.channel.n_nlos, origin);
  cfg.channel.ref_distance_m = parse_double(kv, "channel.ref_distance_m", cfg.channel.ref_distance_m, origin);
  cfg.channel.sf_sigma_db = parse_double(kv, "channel.sf_sigma_db", cfg.channel.sf_sigma_db, origin);
  cfg.channel.sf_dcorr_m = parse_double(kv, "channel.sf_dcorr_m", cfg.channel.sf_dcorr_m, origin);

  if (auto it = kv.find("attack.mode"); it != kv.end()) {
    if (it->second == "ground") cfg.attack.mode = AttackMode::Ground;
    else if (it->second == "airborne") cfg.attack.mode = AttackMode::Airborne;
    else config_fail(origin, "attack.mode must be 'ground' or 'airborne'");
  }
  cfg.attack.jammer_power_dbm = parse_double(kv, "attack.jammer_power_dbm", cfg.attack.jammer_power_dbm, origin);
  cfg.attack.attack_probability = parse_double(kv, "attack.probability", cfg.attack.attack_probability, origin);
  if (kv.contains("attack.ground_x_m") != kv.contains("attack.ground_y_m"))
    config_fail(origin, "attack.ground_x_m and attack.ground_y_m must be set together");
  if (kv.contains("attack.ground_x_m"))
    cfg.attack.ground_position_m = Vec3{parse_double(kv, "attack.ground_x_m", 0.0, origin),
                                        parse_double(kv, "attack.ground_y_m", 0.0, origin), 0.0};
  cfg.attack.standoff_m = parse_double(kv, "attack.standoff_m", cfg.attack.standoff_m, origin);
  cfg.attack.jammer_altitude_m =
      parse_double(kv, "attack.jammer_altitude_m", cfg.attack.jammer_altitude_m, origin);

  cfg.normalization.min_dbm = parse_double(kv, "normalization.min_dbm", cfg.normalization.min_dbm, origin);
  cfg.normalization.max_dbm = parse_double(kv, "normalization.max_dbm", cfg.normalization.max_dbm, origin);

  cfg.diffusion.t_star = parse_int(kv, "diffusion.t_star", cfg.diffusion.t_star, origin);
  cfg.diffusion.rounds = parse_int(kv, "diffusion.rounds", cfg.diffusion.rounds, origin);
  cfg.diffusion.lowpass_factor = parse_int(kv, "diffusion.lowpass_factor", cfg.diffusion.lowpass_factor, origin);
  cfg.diffusion.guidance_enabled = parse_bool(kv, "diffusion.guidance", cfg.diffusion.guidance_enabled, origin);

  cfg.seed = parse_u64(kv, "run.seed", cfg.seed, origin);
  cfg.attack.seed = cfg.seed;

  cfg.validate();
  return cfg;
}

void ScenarioConfig::validate() const {
  grid.validate();
  tx.validate();
  channel.validate();
  attack.validate();
  normalization.validate();
  if (diffusion.rounds < 1 || diffusion.lowpass_factor < 1 || diffusion.t_star < 0)
    throw std::invalid_argument("ScenarioConfig: invalid diffusion settings");
  if (grid.rows % diffusion.lowpass_factor != 0 || grid.cols % diffusion.lowpass_factor != 0)
    throw std::invalid_argument("ScenarioConfig: lowpass factor must divide grid dimensions");
}

ScenarioConfig load_scenario_config(const std::string& path) {
  return scenario_from_kv(load_config_file(path), path);
}

std::string scenario_to_text(const ScenarioConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  const Vec3 tx_pos = cfg.effective_tx_position();
  out << "[grid]\n";
  out << "rows = " << cfg.grid.rows << "\n";
  out << "cols = " << cfg.grid.cols << "\n";
  out << "cell_size_m = " << cfg.grid.cell_size_m << "\n";
  out << "origin_x_m = " << cfg.grid.origin_x_m << "\n";
  out << "origin_y_m = " << cfg.grid.origin_y_m << "\n";
  out << "sampling_altitude_m = " << cfg.grid.sampling_altitude_m << "\n";
  out << "\n[tx]\n";
  out << "x_m = " << tx_pos.x << "\n";
  out << "y_m = " << tx_pos.y << "\n";
  out << "z_m = " << tx_pos.z << "\n";
  out << "power_dbm = " << cfg.tx.power_dbm << "\n";
  out << "frequency_hz = " << cfg.tx.frequency_hz << "\n";
  out << "\n[channel]\n";
  out << "a_los = " << cfg.channel.a_los << "\n";
  out << "b_los = " << cfg.channel.b_los << "\n";
  out << "n_los = " << cfg.channel.n_los << "\n";
  out << "n_nlos = " << cfg.channel.n_nlos << "\n";
  out << "ref_distance_m = " << cfg.channel.ref_distance_m << "\n";
  out << "sf_sigma_db = " << cfg.channel.sf_sigma_db << "\n";
  out << "sf_dcorr_m = " << cfg.channel.sf_dcorr_m << "\n";
  out << "\n[attack]\n";
  out << "mode = " << (cfg.attack.mode == AttackMode::Ground ? "ground" : "airborne") << "\n";
  out << "jammer_power_dbm = " << cfg.attack.jammer_power_dbm << "\n";
  out << "probability = " << cfg.attack.attack_probability << "\n";
  if (cfg.attack.ground_position_m) {
    out << "ground_x_m = " << cfg.attack.ground_position_m->x << "\n";
    out << "ground_y_m = " << cfg.attack.ground_position_m->y << "\n";
  }
  out << "standoff_m = " << cfg.attack.standoff_m << "\n";
  out << "jammer_altitude_m = " << cfg.attack.jammer_altitude_m << "\n";
  out << "\n[normalization]\n";
  out << "min_dbm = " << cfg.normalization.min_dbm << "\n";
  out << "max_dbm = " << cfg.normalization.max_dbm << "\n";
  out << "\n[diffusion]\n";
  out << "t_star = " << cfg.diffusion.t_star << "\n";
  out << "rounds = " << cfg.diffusion.rounds << "\n";
  out << "lowpass_factor = " << cfg.diffusion.lowpass_factor << "\n";
  out << "guidance = " << (cfg.diffusion.guidance_enabled ? "true" : "false") << "\n";
  out << "\n[run]\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

void save_scenario_config(const std::string& path, const ScenarioConfig& cfg) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config for writing: " + path);
  f << scenario_to_text(cfg);
  if (!f) throw IoError("write failed for config: " + path);
}

}  // namespace specrec
