#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "januslab/distill.hpp"
#include "januslab/metrics.hpp"
#include "januslab/prompt.hpp"
#include "januslab/scene.hpp"
#include "januslab/scoremodel.hpp"

namespace januslab {

// Raised for unreadable, malformed or invalid configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` file: one pair per line, dotted keys, `#` starts a
/// comment. Later assignments override earlier ones.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const noexcept { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

struct AblationConfig {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double static_low = 2.0;
  double static_high = 8.0;
  bool trio_prompt_debias = true;
};

/// Everything one experiment needs. Defaults describe the standard biased
/// scenario: beta 0.6, "smiling" blended at 0.8, prompt "a smiling dog" with
/// "dog" protected, 2000 steps on a 32^3 grid with 32x32 renders.
struct ScenarioConfig {
  RunConfig run;
  SceneSpec scene;
  ReferenceOptions reference;
  BiasConfig bias;
  std::vector<std::string> protect{"dog"};
  std::string prompt_text = "a smiling dog";
  double front_half_width_deg = 22.5;
  double top_elevation_deg = 60.0;
  std::filesystem::path table_path;  // empty: built-in example table
  MetricOptions metrics;
  AblationConfig ablation;
  std::filesystem::path output_dir = "out";

  static ScenarioConfig defaults();
  // Applies every key of `kv` on top of the defaults; unknown keys and bad
  // values raise ConfigError. Relative paths resolve against base_dir.
  static ScenarioConfig from_kv(const KeyValueConfig& kv, const std::filesystem::path& base_dir = {});
  static ScenarioConfig load(const std::filesystem::path& path);

  // Re-derives the pieces that depend on several keys (bins, prompt, table,
  // image sizes) and validates the whole scenario. Throws ConfigError.
  void finalize();

  ViewBinConfig bins() const;
};

// The built-in table used when no table path is configured.
CondProbTable example_table();

// Documented key list with defaults, in file syntax.
std::string default_config_text();

}  // namespace januslab
