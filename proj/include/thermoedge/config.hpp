#pragma once

// Resolved run configuration. Precedence, lowest first: built-in defaults,
// JSON config file, THERMOEDGE_* environment variables, command-line flags.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "thermoedge/dissipation.hpp"
#include "thermoedge/entropy.hpp"
#include "thermoedge/errors.hpp"
#include "thermoedge/format.hpp"
#include "thermoedge/nn.hpp"

namespace thermoedge {

struct QuantizationConfig {
  std::uint32_t hidden_bins = 16;
  std::uint32_t gray_input_bins = 8;
  double output_threshold = 0.5;

  bool operator==(const QuantizationConfig&) const = default;
};

struct RunConfig {
  std::uint64_t seed = 42;
  NetworkTopology topology;
  AdamConfig adam;
  std::size_t batch_size = 128;
  std::size_t max_epochs = 100;
  std::size_t patience = 5;
  QuantizationConfig quantization;
  double temperature = 300.0;
  std::size_t ledger_epochs = 10;
  std::size_t train_images = 16;
  std::size_t val_images = 4;
  // Patch extraction for synthetic images: "padded" (every pixel, white
  // outside the frame) or "interior".
  std::string synthetic_border = "padded";

  bool operator==(const RunConfig&) const = default;

  void validate() const {
    try {
      topology.validate();
      adam.validate();
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
    if (topology.input_size != 9 || topology.output_size != 1) {
      throw ConfigError("topology must have 9 inputs and 1 output for 3x3 patch classification");
    }
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
    if (max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
    if (patience == 0) throw ConfigError("patience must be >= 1");
    if (ledger_epochs == 0) throw ConfigError("ledger_epochs must be >= 1");
    if (quantization.hidden_bins < 2) throw ConfigError("quantization.hidden_bins must be >= 2");
    if (quantization.gray_input_bins < 2) throw ConfigError("quantization.gray_input_bins must be >= 2");
    if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
    if (train_images == 0 || val_images == 0) throw ConfigError("train_images and val_images must be >= 1");
    if (synthetic_border != "padded" && synthetic_border != "interior") {
      throw ConfigError("synthetic_border must be 'padded' or 'interior'");
    }
  }

  FitOptions fit_options() const {
    return {max_epochs, patience, batch_size, seed, adam};
  }

  LayerSchemes schemes_for(const PatchDataset& data) const {
    auto s = LayerSchemes::defaults_for(data, quantization.hidden_bins, quantization.gray_input_bins);
    s.output = QuantizationScheme::binary_threshold(quantization.output_threshold);
    return s;
  }

  PhysicalConstants constants() const { return {PhysicalConstants{}.boltzmann, temperature}; }
};

inline nlohmann::json to_json(const RunConfig& c) {
  return nlohmann::json{
      {"seed", c.seed},
      {"topology", {{"input", c.topology.input_size}, {"hidden", c.topology.hidden_size}, {"output", c.topology.output_size}}},
      {"adam", {{"lr", c.adam.lr}, {"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}}},
      {"batch_size", c.batch_size},
      {"max_epochs", c.max_epochs},
      {"patience", c.patience},
      {"quantization",
       {{"hidden_bins", c.quantization.hidden_bins},
        {"gray_input_bins", c.quantization.gray_input_bins},
        {"output_threshold", c.quantization.output_threshold}}},
      {"temperature", c.temperature},
      {"ledger_epochs", c.ledger_epochs},
      {"train_images", c.train_images},
      {"val_images", c.val_images},
      {"synthetic_border", c.synthetic_border},
  };
}

namespace detail {

template <typename T>
void read_field(const nlohmann::json& obj, const char* key, T& dst, const std::string& path) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config field '" + path + key + "': " + e.what());
  }
}

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> known, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("config section '" + path + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError("unknown config field '" + path + key + "'");
  }
}

}  // namespace detail

// Overlays the fields present in `j` onto `base`; unknown fields are errors.
inline RunConfig merge_json(RunConfig base, const nlohmann::json& j) {
  using detail::read_field;
  detail::reject_unknown(j,
                         {"seed", "topology", "adam", "batch_size", "max_epochs", "patience", "quantization",
                          "temperature", "ledger_epochs", "train_images", "val_images", "synthetic_border"},
                         "");
  read_field(j, "seed", base.seed, "");
  if (j.contains("topology")) {
    const auto& t = j.at("topology");
    detail::reject_unknown(t, {"input", "hidden", "output"}, "topology.");
    read_field(t, "input", base.topology.input_size, "topology.");
    read_field(t, "hidden", base.topology.hidden_size, "topology.");
    read_field(t, "output", base.topology.output_size, "topology.");
  }
  if (j.contains("adam")) {
    const auto& a = j.at("adam");
    detail::reject_unknown(a, {"lr", "beta1", "beta2", "epsilon"}, "adam.");
    read_field(a, "lr", base.adam.lr, "adam.");
    read_field(a, "beta1", base.adam.beta1, "adam.");
    read_field(a, "beta2", base.adam.beta2, "adam.");
    read_field(a, "epsilon", base.adam.epsilon, "adam.");
  }
  read_field(j, "batch_size", base.batch_size, "");
  read_field(j, "max_epochs", base.max_epochs, "");
  read_field(j, "patience", base.patience, "");
  if (j.contains("quantization")) {
    const auto& q = j.at("quantization");
    detail::reject_unknown(q, {"hidden_bins", "gray_input_bins", "output_threshold"}, "quantization.");
    read_field(q, "hidden_bins", base.quantization.hidden_bins, "quantization.");
    read_field(q, "gray_input_bins", base.quantization.gray_input_bins, "quantization.");
    read_field(q, "output_threshold", base.quantization.output_threshold, "quantization.");
  }
  read_field(j, "temperature", base.temperature, "");
  read_field(j, "ledger_epochs", base.ledger_epochs, "");
  read_field(j, "train_images", base.train_images, "");
  read_field(j, "val_images", base.val_images, "");
  read_field(j, "synthetic_border", base.synthetic_border, "");
  return base;
}

inline RunConfig from_json(const nlohmann::json& j) {
  auto c = merge_json(RunConfig{}, j);
  c.validate();
  return c;
}

inline RunConfig load_config_file(RunConfig base, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return merge_json(std::move(base), j);
}

inline constexpr const char* kEnvPrefix = "THERMOEDGE_";

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

/// Applies THERMOEDGE_SEED, THERMOEDGE_EPOCHS, THERMOEDGE_PATIENCE,
/// THERMOEDGE_SCHEME_BINS, THERMOEDGE_TEMPERATURE and THERMOEDGE_BATCH_SIZE.
inline RunConfig apply_env_overrides(RunConfig c, const EnvLookup& env = process_env) {
  auto get = [&](const char* suffix) { return env(std::string(kEnvPrefix) + suffix); };
  auto as_u64 = [](const std::string& name, const std::string& v) {
    try {
      return parse_u64(v);
    } catch (const DataError&) {
      throw ConfigError("environment variable " + name + "='" + v + "' is not a non-negative integer");
    }
  };
  auto as_double = [](const std::string& name, const std::string& v) {
    try {
      return parse_double(v);
    } catch (const DataError&) {
      throw ConfigError("environment variable " + name + "='" + v + "' is not a number");
    }
  };
  if (auto v = get("SEED")) c.seed = as_u64("THERMOEDGE_SEED", *v);
  if (auto v = get("EPOCHS")) c.max_epochs = as_u64("THERMOEDGE_EPOCHS", *v);
  if (auto v = get("PATIENCE")) c.patience = as_u64("THERMOEDGE_PATIENCE", *v);
  if (auto v = get("BATCH_SIZE")) c.batch_size = as_u64("THERMOEDGE_BATCH_SIZE", *v);
  if (auto v = get("SCHEME_BINS")) {
    c.quantization.hidden_bins = static_cast<std::uint32_t>(as_u64("THERMOEDGE_SCHEME_BINS", *v));
  }
  if (auto v = get("TEMPERATURE")) c.temperature = as_double("THERMOEDGE_TEMPERATURE", *v);
  return c;
}

// Stable identifier of the resolved configuration (FNV-1a of canonical JSON).
inline std::string config_hash(const RunConfig& c) { return hex64(fnv1a64(to_json(c).dump())); }

}  // namespace thermoedge
