#pragma once

// Flat key=value run configuration. '#' starts a comment; keys belong to
// either the model or the training config.

#include <fstream>
#include <sstream>
#include <string>

#include "balltraj/data/io.hpp"
#include "balltraj/models/config.hpp"
#include "balltraj/train/trainer.hpp"

namespace balltraj::train {

struct RunConfig {
  models::ModelConfig model;
  TrainConfig train;
};

inline void apply_config_text(RunConfig& rc, const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = data::detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config line without '='", number);
    const std::string key = data::detail::trim(line.substr(0, eq)), value = data::detail::trim(line.substr(eq + 1));
    bool known = false;
    try {
      // seed feeds both
      if (key == "seed") {
        rc.model.set(key, value);
        rc.train.set(key, value);
        known = true;
      } else {
        known = rc.model.set(key, value) || rc.train.set(key, value);
      }
    } catch (const ConfigError& e) {
      throw ParseError(e.what(), number);
    }
    if (!known) throw ParseError("unknown config key: " + key, number);
  }
}

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(base, ss.str());
  base.model.validate();
  base.train.validate();
  return base;
}

}  // namespace balltraj::train
