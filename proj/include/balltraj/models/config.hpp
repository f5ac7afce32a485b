#pragma once

#include <cctype>
#include <sstream>
#include <string>

#include "balltraj/data/types.hpp"

namespace balltraj::models {

enum class Variant { kHLstm, kLstm, kHTransformer, kTransformer, kVrnn };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::kHLstm: return "H_LSTM";
    case Variant::kLstm: return "LSTM";
    case Variant::kHTransformer: return "H_TRANSFORMER";
    case Variant::kTransformer: return "TRANSFORMER";
    case Variant::kVrnn: return "VRNN";
  }
  return "H_LSTM";
}

inline Variant parse_variant(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto& c : s) if (c == '-') c = '_';
  if (s == "H_LSTM" || s == "HLSTM") return Variant::kHLstm;
  if (s == "LSTM") return Variant::kLstm;
  if (s == "H_TRANSFORMER") return Variant::kHTransformer;
  if (s == "TRANSFORMER") return Variant::kTransformer;
  if (s == "VRNN") return Variant::kVrnn;
  throw ConfigError("unknown model variant: " + s);
}

inline bool is_hierarchical(Variant v) { return v == Variant::kHLstm || v == Variant::kHTransformer; }

struct Embeddings {
  bool ppe = true;
  bool fpe = true;
  bool fpi = true;

  bool any() const { return ppe || fpe || fpi; }
  bool operator==(const Embeddings&) const = default;

  std::string to_string() const {
    std::string s;
    auto add = [&](bool on, const char* name) {
      if (!on) return;
      if (!s.empty()) s += '+';
      s += name;
    };
    add(ppe, "PPE");
    add(fpe, "FPE");
    add(fpi, "FPI");
    return s.empty() ? "NONE" : s;
  }

  // "PPE+FPE+FPI", comma or plus separated, case-insensitive.
  static Embeddings parse(const std::string& text) {
    Embeddings e{false, false, false};
    std::string token;
    auto flush = [&] {
      if (token.empty()) return;
      for (auto& c : token) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (token == "PPE") e.ppe = true;
      else if (token == "FPE") e.fpe = true;
      else if (token == "FPI") e.fpi = true;
      else if (token != "NONE") throw ConfigError("unknown embedding: " + token);
      token.clear();
    };
    for (char c : text) {
      if (c == '+' || c == ',' || c == ' ') flush();
      else token += c;
    }
    flush();
    return e;
  }
};

// Normalisation scales applied to inputs inside every model.
inline constexpr double kVelocityScale = 10.0;  // m/s
inline constexpr double kAccelScale = 5.0;      // m/s^2

struct ModelConfig {
  Variant variant = Variant::kHLstm;
  Eigen::Index d_g = 16;
  Eigen::Index d_btr = 128;
  Eigen::Index lstm_hidden = 256;
  int lstm_layers = 2;
  double dropout = 0.2;
  Eigen::Index heads = 4;
  Embeddings embeddings;
  int feature_count = data::kFeatureCount;  // 2, 4 or 6
  bool imputation = false;                  // masked ball observations as extra input
  int transformer_layers = 2;
  Eigen::Index vrnn_latent = 16;
  double kl_weight = 1.0;
  std::uint64_t seed = 0;
  data::PitchConfig pitch;

  void validate() const {
    pitch.validate();
    if (d_g <= 0 || d_btr <= 0 || lstm_hidden <= 0 || lstm_layers <= 0 || heads <= 0 || transformer_layers <= 0 ||
        vrnn_latent <= 0) {
      throw ConfigError("model dimensions must be positive");
    }
    if (d_g % heads != 0 || d_btr % heads != 0) throw ConfigError("embedding widths must be divisible by heads");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (feature_count != 2 && feature_count != 4 && feature_count != 6) {
      throw ConfigError("feature_count must be 2, 4 or 6");
    }
    if (!(kl_weight >= 0.0)) throw ConfigError("kl_weight must be non-negative");
    if (is_hierarchical(variant)) {
      if (!embeddings.any()) throw ConfigError("hierarchical models need at least one context embedding");
      if (embeddings.fpi && !embeddings.ppe && !embeddings.fpe) {
        throw ConfigError("FPI alone cannot drive per-player possession classification");
      }
    }
    if ((variant == Variant::kHTransformer || variant == Variant::kTransformer) && lstm_hidden % heads != 0) {
      throw ConfigError("transformer width must be divisible by heads");
    }
    if (variant == Variant::kVrnn && imputation) throw ConfigError("VRNN does not support imputation mode");
  }

  std::string to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "variant=" << models::to_string(variant) << "\n"
       << "d_g=" << d_g << "\n"
       << "d_btr=" << d_btr << "\n"
       << "lstm_hidden=" << lstm_hidden << "\n"
       << "lstm_layers=" << lstm_layers << "\n"
       << "dropout=" << dropout << "\n"
       << "heads=" << heads << "\n"
       << "embeddings=" << embeddings.to_string() << "\n"
       << "feature_count=" << feature_count << "\n"
       << "imputation=" << (imputation ? 1 : 0) << "\n"
       << "transformer_layers=" << transformer_layers << "\n"
       << "vrnn_latent=" << vrnn_latent << "\n"
       << "kl_weight=" << kl_weight << "\n"
       << "seed=" << seed << "\n"
       << "pitch_length=" << pitch.length << "\n"
       << "pitch_width=" << pitch.width << "\n";
    return os.str();
  }

  // Applies one key; returns false for keys that are not model settings.
  bool set(const std::string& key, const std::string& value) {
    try {
      if (key == "variant") variant = parse_variant(value);
      else if (key == "d_g") d_g = std::stol(value);
      else if (key == "d_btr") d_btr = std::stol(value);
      else if (key == "lstm_hidden") lstm_hidden = std::stol(value);
      else if (key == "lstm_layers") lstm_layers = std::stoi(value);
      else if (key == "dropout") dropout = std::stod(value);
      else if (key == "heads") heads = std::stol(value);
      else if (key == "embeddings") embeddings = Embeddings::parse(value);
      else if (key == "feature_count") feature_count = std::stoi(value);
      else if (key == "imputation") imputation = value == "1" || value == "true";
      else if (key == "transformer_layers") transformer_layers = std::stoi(value);
      else if (key == "vrnn_latent") vrnn_latent = std::stol(value);
      else if (key == "kl_weight") kl_weight = std::stod(value);
      else if (key == "seed") seed = std::stoull(value);
      else if (key == "pitch_length") pitch.length = std::stod(value);
      else if (key == "pitch_width") pitch.width = std::stod(value);
      else return false;
    } catch (const std::logic_error&) {
      throw ConfigError("bad value for " + key + ": " + value);
    }
    return true;
  }

  static ModelConfig from_text(const std::string& text) {
    ModelConfig c;
    std::istringstream is(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(is, line)) {
      ++number;
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError("model config line without '='", number);
      if (!c.set(line.substr(0, eq), line.substr(eq + 1))) {
        throw ParseError("unknown model config key: " + line.substr(0, eq), number);
      }
    }
    c.validate();
    return c;
  }

  bool operator==(const ModelConfig& o) const { return to_text() == o.to_text(); }
};

}  // namespace balltraj::models
