// Copyright (C) 2026 specrec authors
// SPDX-License-Identifier: Apache-2.0
#ifndef SPECREC_CONFIG_HPP
#define SPECREC_CONFIG_HPP

#include <map>
#include <string>

#include "specrec/attack.hpp"
#include "specrec/channel.hpp"
#include "specrec/dataset.hpp"
#include "specrec/diffusion.hpp"
#include "specrec/grid.hpp"

namespace specrec {

// Full generative description of one case-study scenario. Parsed from a
// sectioned key = value config file; every field has the documented
// default so an empty file is a valid config.
struct ScenarioConfig {
  GridSpec grid;
  Transmitter tx;
  ChannelParams channel;
  AttackScenario attack;
  NormalizationSpec normalization;
  GuidanceConfig diffusion;
  std::uint64_t seed = 1;

  // tx defaults to the grid footprint center when the config does not
  // place it explicitly
  bool tx_position_set = false;

  void validate() const;
  Vec3 effective_tx_position() const {
    return tx_position_set ? tx.position_m : grid.footprint_center();
  }
};

// Raw sectioned key/value content: keys stored as "section.key".
using ConfigKv = std::map<std::string, std::string>;

ConfigKv parse_config_text(const std::string& text, const std::string& origin);
ConfigKv load_config_file(const std::string& path);

ScenarioConfig scenario_from_kv(const ConfigKv& kv, const std::string& origin);
ScenarioConfig load_scenario_config(const std::string& path);

// Serialized form with every field explicit; written next to generated
// artifacts so each run logs the resolved configuration.
std::string scenario_to_text(const ScenarioConfig& cfg);
void save_scenario_config(const std::string& path, const ScenarioConfig& cfg);

}  // namespace specrec

#endif  // SPECREC_CONFIG_HPP
