#pragma once

// Versioned binary checkpoint: magic, version, config text, then named
// tensors stored as 64-bit floats.
//
//   "BALLTRAJ" u32 version u64 config_len config
//   u64 count { u32 name_len name i64 rows i64 cols f64[rows*cols] }*

#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "balltraj/models/gk.hpp"
#include "balltraj/models/hierarchical.hpp"
#include "balltraj/models/vrnn.hpp"

namespace balltraj::models {

inline constexpr char kCheckpointMagic[8] = {'B', 'A', 'L', 'L', 'T', 'R', 'A', 'J'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

template <typename S>
std::unique_ptr<BallModel<S>> make_model(const ModelConfig& config) {
  config.validate();
  switch (config.variant) {
    case Variant::kHLstm:
    case Variant::kHTransformer: return std::make_unique<HierarchicalModel<S>>(config);
    case Variant::kLstm:
    case Variant::kTransformer: return std::make_unique<FlatModel<S>>(config);
    case Variant::kVrnn: return std::make_unique<VrnnModel<S>>(config);
  }
  throw ConfigError("unknown model variant");
}

struct CheckpointData {
  std::string config;
  std::vector<std::pair<std::string, Matrix<double>>> tensors;
};

namespace detail {

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::string& path) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw ParseError("truncated checkpoint " + path, 0);
  return v;
}

inline std::string get_string(std::istream& is, std::size_t n, const std::string& path) {
  if (n > (std::size_t{1} << 30)) throw ParseError("corrupt checkpoint " + path, 0);
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw ParseError("truncated checkpoint " + path, 0);
  return s;
}

}  // namespace detail

template <typename S>
void save_checkpoint(const std::string& path, const std::string& config, const nn::ParameterStore<S>& store) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write checkpoint " + path);
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put(os, kCheckpointVersion);
  detail::put(os, static_cast<std::uint64_t>(config.size()));
  os.write(config.data(), static_cast<std::streamsize>(config.size()));
  detail::put(os, static_cast<std::uint64_t>(store.all().size()));
  for (const auto& p : store.all()) {
    detail::put(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    detail::put(os, static_cast<std::int64_t>(p->value.rows()));
    detail::put(os, static_cast<std::int64_t>(p->value.cols()));
    const Matrix<double> v = p->value.template cast<double>();
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * v.size()));
  }
  if (!os) throw Error("failed writing checkpoint " + path);
}

inline CheckpointData read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open checkpoint " + path);
  char magic[sizeof(kCheckpointMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw ParseError("not a checkpoint: " + path, 0);
  const auto version = detail::get<std::uint32_t>(is, path);
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version) + " in " + path, 0);
  }
  CheckpointData data;
  data.config = detail::get_string(is, detail::get<std::uint64_t>(is, path), path);
  const auto count = detail::get<std::uint64_t>(is, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string name = detail::get_string(is, detail::get<std::uint32_t>(is, path), path);
    const auto rows = detail::get<std::int64_t>(is, path), cols = detail::get<std::int64_t>(is, path);
    if (rows < 0 || cols < 0 || rows * cols > (std::int64_t{1} << 32)) throw ParseError("corrupt tensor shape in " + path, 0);
    Matrix<double> m(rows, cols);
    is.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!is) throw ParseError("truncated checkpoint " + path, 0);
    data.tensors.emplace_back(std::move(name), std::move(m));
  }
  return data;
}

// Copies tensors into a freshly built store; names and shapes must match.
template <typename S>
void load_parameters(nn::ParameterStore<S>& store, const CheckpointData& data) {
  if (data.tensors.size() != store.all().size()) {
    throw ConfigError("checkpoint holds " + std::to_string(data.tensors.size()) + " tensors, model expects " +
                      std::to_string(store.all().size()));
  }
  for (const auto& [name, value] : data.tensors) {
    ag::Parameter<S>* p = store.find(name);
    if (p == nullptr) throw ConfigError("checkpoint tensor not in model: " + name);
    if (p->value.rows() != value.rows() || p->value.cols() != value.cols()) {
      throw ConfigError("checkpoint tensor shape mismatch: " + name);
    }
    p->value = value.template cast<S>();
  }
}

template <typename S>
void save_model(const std::string& path, const BallModel<S>& model) {
  save_checkpoint(path, model.config().to_text(), model.parameters());
}

template <typename S>
std::unique_ptr<BallModel<S>> load_model(const std::string& path) {
  const CheckpointData data = read_checkpoint(path);
  if (data.config.rfind("model=GK", 0) == 0) throw ConfigError(path + " is a goalkeeper checkpoint");
  auto model = make_model<S>(ModelConfig::from_text(data.config));
  load_parameters(model->parameters(), data);
  return model;
}

template <typename S>
void save_gk_model(const std::string& path, const GkModel<S>& model) {
  save_checkpoint(path, model.config().to_text(), model.parameters());
}

template <typename S>
std::unique_ptr<GkModel<S>> load_gk_model(const std::string& path) {
  const CheckpointData data = read_checkpoint(path);
  auto model = std::make_unique<GkModel<S>>(GkConfig::from_text(data.config));
  load_parameters(model->parameters(), data);
  return model;
}

}  // namespace balltraj::models
