#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cdiff/ctmc.hpp"
#include "cdiff/eval.hpp"
#include "cdiff/models.hpp"
#include "cdiff/samplers.hpp"
#include "cdiff/toy_data.hpp"
#include "cdiff/training.hpp"

namespace cdiff {

inline constexpr std::string_view kToolVersion = "cdiff 0.1.0";

enum class KeyType { integer, unsigned_integer, real, boolean, choice, text };

struct KeyInfo {
  std::string key;
  KeyType type;
  std::string default_value;
  std::vector<std::string> choices;
  std::string help;
};

// Every recognized key with its type and default.
const std::vector<KeyInfo>& config_keys();

// Flat dotted-key configuration. Values are stored in normalized text form, so
// serialize() -> parse() is a fixed point and the digest is stable.
class RunConfig {
 public:
  RunConfig();

  // "key = value" lines; '#' starts a comment. Unknown keys and malformed
  // values throw ConfigError naming the key (and line).
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  void set(std::string_view key, std::string_view value);
  const std::string& get(std::string_view key) const;
  long get_int(std::string_view key) const;
  std::uint64_t get_uint(std::string_view key) const;
  double get_real(std::string_view key) const;
  bool get_bool(std::string_view key) const;

  // All keys, sorted, "key = value" per line.
  std::string serialize() const;
  // FNV-1a 64 of serialize(), as 16 hex digits.
  std::string digest() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

// Typed views of a RunConfig.
std::unique_ptr<DataSource> make_data_source(const RunConfig& cfg);
ForwardProcess make_process(const RunConfig& cfg, const StateSpace& space);
nlohmann::json model_descriptor(const RunConfig& cfg, const StateSpace& space);
TrainConfig make_train_config(const RunConfig& cfg);
SamplerConfig make_sampler_config(const RunConfig& cfg);
MmdConfig make_mmd_config(const RunConfig& cfg);

}  // namespace cdiff
