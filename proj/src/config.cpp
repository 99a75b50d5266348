#include "januslab/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "januslab/errors.hpp"

namespace januslab {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key + ": integer out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

Vec3 to_vec3(const std::string& key, const std::string& v) {
  const auto parts = split(v, ',');
  if (parts.size() != 3) throw ConfigError(key + ": expected three comma-separated numbers");
  return {to_double(key, parts[0]), to_double(key, parts[1]), to_double(key, parts[2])};
}

std::string fmt(double v) { return format_double(v); }
std::string fmt(const Vec3& v) { return fmt(v.x) + "," + fmt(v.y) + "," + fmt(v.z); }
std::string fmt_deg(double rad) { return fmt(rad / kDeg); }

// Seeds as a comma list; "a-b" expands to an inclusive range.
std::vector<std::uint64_t> to_seeds(const std::string& key, const std::string& v) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(v, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      const long long s = to_int(key, item);
      if (s < 0) throw ConfigError(key + ": seeds must be >= 0");
      out.push_back(static_cast<std::uint64_t>(s));
      continue;
    }
    const long long a = to_int(key, trim(item.substr(0, dash)));
    const long long b = to_int(key, trim(item.substr(dash + 1)));
    if (a < 0 || b < a) throw ConfigError(key + ": bad seed range '" + item + "'");
    for (long long s = a; s <= b; ++s) out.push_back(static_cast<std::uint64_t>(s));
  }
  if (out.empty()) throw ConfigError(key + ": empty seed list");
  return out;
}

std::string clip_mode_name(ClipMode m) {
  switch (m) {
    case ClipMode::none:
      return "none";
    case ClipMode::fixed:
      return "static";
    case ClipMode::dynamic:
      return "dynamic";
  }
  return "none";
}

struct Key {
  const char* name;
  const char* help;
  std::function<std::string(const ScenarioConfig&)> get;
  std::function<void(ScenarioConfig&, const std::string&, const std::filesystem::path&)> set;
};

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto add_double = [&](const char* name, const char* help, std::function<double&(ScenarioConfig&)> ref) {
      k.push_back({name, help, [ref](const ScenarioConfig& c) { return fmt(ref(const_cast<ScenarioConfig&>(c))); },
                   [ref, name](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                     ref(c) = to_double(name, v);
                   }});
    };
    auto add_deg = [&](const char* name, const char* help, std::function<double&(ScenarioConfig&)> ref) {
      k.push_back({name, help, [ref](const ScenarioConfig& c) { return fmt_deg(ref(const_cast<ScenarioConfig&>(c))); },
                   [ref, name](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                     ref(c) = to_double(name, v) * kDeg;
                   }});
    };
    auto add_int = [&](const char* name, const char* help, std::function<int&(ScenarioConfig&)> ref) {
      k.push_back({name, help,
                   [ref](const ScenarioConfig& c) { return std::to_string(ref(const_cast<ScenarioConfig&>(c))); },
                   [ref, name](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                     ref(c) = to_int32(name, v);
                   }});
    };
    auto add_bool = [&](const char* name, const char* help, std::function<bool&(ScenarioConfig&)> ref) {
      k.push_back({name, help,
                   [ref](const ScenarioConfig& c) {
                     return std::string(ref(const_cast<ScenarioConfig&>(c)) ? "true" : "false");
                   },
                   [ref, name](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                     ref(c) = to_bool(name, v);
                   }});
    };

    add_int("run.steps", "optimization steps", [](ScenarioConfig& c) -> int& { return c.run.steps; });
    k.push_back({"run.seed", "seed for init, cameras, sigma and PAAS noise",
                 [](const ScenarioConfig& c) { return std::to_string(c.run.seed); },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   const long long s = to_int("run.seed", v);
                   if (s < 0) throw ConfigError("run.seed: must be >= 0");
                   c.run.seed = static_cast<std::uint64_t>(s);
                 }});
    add_double("run.lr", "Adam learning rate", [](ScenarioConfig& c) -> double& { return c.run.adam.learning_rate; });
    add_double("run.adam_beta1", "Adam first-moment decay", [](ScenarioConfig& c) -> double& { return c.run.adam.beta1; });
    add_double("run.adam_beta2", "Adam second-moment decay", [](ScenarioConfig& c) -> double& { return c.run.adam.beta2; });
    add_double("run.adam_eps", "Adam epsilon", [](ScenarioConfig& c) -> double& { return c.run.adam.epsilon; });
    add_int("run.resolution", "voxel grid resolution N", [](ScenarioConfig& c) -> int& { return c.run.resolution; });
    add_int("run.image_size", "rendered image height and width", [](ScenarioConfig& c) -> int& {
      return c.reference.camera.height;
    });
    k.push_back({"run.init", "constant | seeded_noise",
                 [](const ScenarioConfig& c) {
                   return std::string(c.run.init == InitMode::constant ? "constant" : "seeded_noise");
                 },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   if (v == "constant") c.run.init = InitMode::constant;
                   else if (v == "seeded_noise") c.run.init = InitMode::seeded_noise;
                   else throw ConfigError("run.init: expected constant or seeded_noise");
                 }});
    add_int("run.paas_samples", "noise draws per PAAS estimate", [](ScenarioConfig& c) -> int& { return c.run.paas_samples; });
    add_double("sigma.min", "smallest noise level", [](ScenarioConfig& c) -> double& { return c.run.sigma.sigma_min; });
    add_double("sigma.max", "largest noise level", [](ScenarioConfig& c) -> double& { return c.run.sigma.sigma_max; });
    add_double("guidance.scale", "classifier-free guidance scale s", [](ScenarioConfig& c) -> double& {
      return c.run.guidance.scale;
    });
    k.push_back({"clip.mode", "none | static | dynamic",
                 [](const ScenarioConfig& c) { return clip_mode_name(c.run.clip.mode); },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   if (v == "none") c.run.clip.mode = ClipMode::none;
                   else if (v == "static") c.run.clip.mode = ClipMode::fixed;
                   else if (v == "dynamic") c.run.clip.mode = ClipMode::dynamic;
                   else throw ConfigError("clip.mode: expected none, static or dynamic");
                 }});
    add_double("clip.psi_static", "threshold for static mode", [](ScenarioConfig& c) -> double& {
      return c.run.clip.psi_static;
    });
    add_double("clip.psi_start", "dynamic threshold at step 0", [](ScenarioConfig& c) -> double& {
      return c.run.clip.psi_start;
    });
    add_double("clip.psi_end", "dynamic threshold at the last step", [](ScenarioConfig& c) -> double& {
      return c.run.clip.psi_end;
    });
    add_int("clip.max_step", "ramp length; 0 means steps - 1", [](ScenarioConfig& c) -> int& { return c.run.clip.max_step; });
    k.push_back({"clip.stage", "post_guidance | pre_guidance",
                 [](const ScenarioConfig& c) {
                   return std::string(c.run.clip_stage == ClipStage::post_guidance ? "post_guidance" : "pre_guidance");
                 },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   if (v == "post_guidance") c.run.clip_stage = ClipStage::post_guidance;
                   else if (v == "pre_guidance") c.run.clip_stage = ClipStage::pre_guidance;
                   else throw ConfigError("clip.stage: expected post_guidance or pre_guidance");
                 }});
    add_deg("camera.elevation_min_deg", "lowest sampled elevation", [](ScenarioConfig& c) -> double& {
      return c.run.sampler.elevation_min;
    });
    add_deg("camera.elevation_max_deg", "highest sampled elevation", [](ScenarioConfig& c) -> double& {
      return c.run.sampler.elevation_max;
    });
    add_double("camera.radius", "camera distance from the origin", [](ScenarioConfig& c) -> double& {
      return c.reference.camera.radius;
    });
    add_double("camera.fov_y", "vertical field of view (radians)", [](ScenarioConfig& c) -> double& {
      return c.reference.camera.fov_y;
    });
    add_int("render.samples_per_ray", "samples per ray", [](ScenarioConfig& c) -> int& {
      return c.run.render.samples_per_ray;
    });
    k.push_back({"render.background", "background color r,g,b",
                 [](const ScenarioConfig& c) { return fmt(c.run.render.background); },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   c.run.render.background = to_vec3("render.background", v);
                 }});
    add_double("render.near", "near clip distance", [](ScenarioConfig& c) -> double& { return c.run.render.near; });
    add_double("render.far", "far clip distance", [](ScenarioConfig& c) -> double& { return c.run.render.far; });
    k.push_back({"prompt.text", "user prompt",
                 [](const ScenarioConfig& c) { return c.prompt_text; },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) { c.prompt_text = v; }});
    k.push_back({"prompt.protect", "comma-separated protected words",
                 [](const ScenarioConfig& c) {
                   std::string s;
                   for (const auto& w : c.protect) s += (s.empty() ? "" : ",") + w;
                   return s;
                 },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) { c.protect = split(v, ','); }});
    add_bool("prompt.debias", "remove low-PMI words per view", [](ScenarioConfig& c) -> bool& { return c.run.prompt_debias; });
    add_double("pmi.threshold", "normalized PMI cutoff", [](ScenarioConfig& c) -> double& { return c.run.pmi.threshold; });
    add_double("pmi.default_prior", "P(u) when the table leaves it empty", [](ScenarioConfig& c) -> double& {
      return c.run.pmi.default_prior;
    });
    k.push_back({"pmi.normalizer", "max | mean",
                 [](const ScenarioConfig& c) {
                   return std::string(c.run.pmi.normalizer == PmiNormalizer::max ? "max" : "mean");
                 },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   if (v == "max") c.run.pmi.normalizer = PmiNormalizer::max;
                   else if (v == "mean") c.run.pmi.normalizer = PmiNormalizer::mean;
                   else throw ConfigError("pmi.normalizer: expected max or mean");
                 }});
    k.push_back({"pmi.table", "probability table CSV; empty uses the built-in example",
                 [](const ScenarioConfig& c) { return c.table_path.string(); },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path& base) {
                   c.table_path = v.empty() ? std::filesystem::path{} : (std::filesystem::path(v).is_absolute() ? std::filesystem::path(v) : base / v);
                 }});
    add_double("bins.front_half_width_deg", "half width of the front and back bins", [](ScenarioConfig& c) -> double& {
      return c.front_half_width_deg;
    });
    add_double("bins.top_elevation_deg", "elevations above this map to the top view", [](ScenarioConfig& c) -> double& {
      return c.top_elevation_deg;
    });
    add_double("bias.beta", "canonical-view weight in every conditional", [](ScenarioConfig& c) -> double& {
      return c.bias.beta;
    });
    k.push_back({"bias.canonical_bin", "canonical view bin",
                 [](const ScenarioConfig& c) { return c.bias.canonical_bin; },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) { c.bias.canonical_bin = v; }});
    k.push_back({"bias.word_bias", "comma-separated word:blend pairs",
                 [](const ScenarioConfig& c) {
                   std::string s;
                   for (const auto& wb : c.bias.word_bias) s += (s.empty() ? "" : ",") + wb.word + ":" + fmt(wb.blend);
                   return s;
                 },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   c.bias.word_bias.clear();
                   for (const auto& item : split(v, ',')) {
                     const auto colon = item.find(':');
                     if (colon == std::string::npos) throw ConfigError("bias.word_bias: expected word:blend");
                     c.bias.word_bias.push_back({trim(item.substr(0, colon)), to_double("bias.word_bias", trim(item.substr(colon + 1)))});
                   }
                 }});
    add_double("scene.body_radius", "radius of the reference sphere", [](ScenarioConfig& c) -> double& {
      return c.scene.body_radius;
    });
    add_double("scene.density", "density inside the reference sphere", [](ScenarioConfig& c) -> double& {
      return c.scene.density;
    });
    add_double("scene.hue_swing", "amplitude of the azimuth hue drift", [](ScenarioConfig& c) -> double& {
      return c.scene.hue_swing;
    });
    add_deg("reference.template_elevation_deg", "elevation of the template renders", [](ScenarioConfig& c) -> double& {
      return c.reference.template_elevation;
    });
    add_deg("reference.top_elevation_deg", "elevation of the top-view template", [](ScenarioConfig& c) -> double& {
      return c.reference.top_elevation;
    });
    add_double("reference.template_spacing_deg", "widest azimuth gap between template modes", [](ScenarioConfig& c) -> double& {
      return c.reference.template_spacing_deg;
    });
    add_int("metrics.n_views", "turntable views for metrics", [](ScenarioConfig& c) -> int& { return c.metrics.n_views; });
    add_deg("metrics.elevation_deg", "turntable elevation", [](ScenarioConfig& c) -> double& { return c.metrics.elevation; });
    k.push_back({"metrics.distance", "image distance by name (pyramid_mad | mean_abs)",
                 [](const ScenarioConfig& c) { return c.metrics.distance; },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) { c.metrics.distance = v; }});
    add_double("metrics.match_threshold", "face correlation threshold", [](ScenarioConfig& c) -> double& {
      return c.metrics.match_threshold;
    });
    k.push_back({"ablate.seeds", "seed list, e.g. 0-9 or 1,4,7",
                 [](const ScenarioConfig& c) {
                   std::string s;
                   for (auto v : c.ablation.seeds) s += (s.empty() ? "" : ",") + std::to_string(v);
                   return s;
                 },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path&) {
                   c.ablation.seeds = to_seeds("ablate.seeds", v);
                 }});
    add_double("ablate.static_low", "low static threshold of the clipping trio", [](ScenarioConfig& c) -> double& {
      return c.ablation.static_low;
    });
    add_double("ablate.static_high", "high static threshold of the clipping trio", [](ScenarioConfig& c) -> double& {
      return c.ablation.static_high;
    });
    add_bool("ablate.trio_prompt_debias", "prompt debiasing in the clipping trio", [](ScenarioConfig& c) -> bool& {
      return c.ablation.trio_prompt_debias;
    });
    k.push_back({"output.dir", "output directory",
                 [](const ScenarioConfig& c) { return c.output_dir.string(); },
                 [](ScenarioConfig& c, const std::string& v, const std::filesystem::path& base) {
                   c.output_dir = std::filesystem::path(v).is_absolute() ? std::filesystem::path(v) : base / v;
                 }});
    return k;
  }();
  return table;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& origin) {
  KeyValueConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(number) + ": empty key");
    cfg.set(key, trim(t.substr(eq + 1)));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse(in, path.string());
}

void KeyValueConfig::set(const std::string& key, const std::string& value) { entries_[key] = value; }

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) != 0; }

const std::string& KeyValueConfig::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing key " + key);
  return it->second;
}

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig c;
  c.run.clip.mode = ClipMode::none;
  c.bias.beta = 0.6;
  c.bias.word_bias = {{"smiling", 0.8}};
  c.finalize();
  return c;
}

ScenarioConfig ScenarioConfig::from_kv(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
  ScenarioConfig c = defaults();
  for (const auto& [key, value] : kv.entries()) {
    const auto& all = keys();
    auto it = std::find_if(all.begin(), all.end(), [&](const Key& k) { return key == k.name; });
    if (it == all.end()) throw ConfigError("unknown config key '" + key + "'");
    it->set(c, value, base_dir);
  }
  c.finalize();
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  return from_kv(KeyValueConfig::load(path), path.parent_path());
}

ViewBinConfig ScenarioConfig::bins() const {
  ViewBinConfig b = ViewBinConfig::standard(front_half_width_deg);
  b.top_elevation_deg = top_elevation_deg;
  return b;
}

void ScenarioConfig::finalize() {
  try {
    if (!(front_half_width_deg > 0.0 && front_half_width_deg < 90.0))
      throw ConfigError("bins.front_half_width_deg must lie in (0, 90)");
    run.bins = bins();
    reference.camera.width = reference.camera.height;
    run.sampler.radius = reference.camera.radius;
    run.sampler.fov_y = reference.camera.fov_y;
    run.sampler.height = reference.camera.height;
    run.sampler.width = reference.camera.width;
    reference.render = run.render;
    metrics.camera = reference.camera;
    metrics.render = run.render;
    run.prompt = Prompt::parse(prompt_text, protect);
    if (table_path.empty()) {
      run.table = std::make_shared<const CondProbTable>(example_table());
    } else {
      if (!std::filesystem::exists(table_path)) throw ConfigError("table not found: " + table_path.string());
      run.table = std::make_shared<const CondProbTable>(load_table(table_path, run.pmi.default_prior));
    }
    run.validate();
    bias.validate();
    validate_camera(reference.camera);
    if (metrics.n_views < 2) throw ConfigError("metrics.n_views must be >= 2");
    if (!(metrics.match_threshold > -1.0 && metrics.match_threshold < 1.0))
      throw ConfigError("metrics.match_threshold must lie in (-1, 1)");
    distance_by_name(metrics.distance);
    if (!(ablation.static_low > 0.0 && ablation.static_high > 0.0))
      throw ConfigError("ablate thresholds must be > 0");
    if (ablation.seeds.empty()) throw ConfigError("ablate.seeds is empty");
    for (const auto& w : run.prompt.words) {
      if (!run.prompt.protected_words.count(w) && !run.table->has_word(w))
        throw ConfigError("prompt word '" + w + "' is missing from the probability table");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

CondProbTable example_table() {
  static const char* kCsv =
      "word,view,p_given_present,p_given_absent,prior\n"
      "smiling,front view,0.70,0.25,0.5\n"
      "smiling,side view,0.15,0.25,0.5\n"
      "smiling,back view,0.05,0.25,0.5\n"
      "smiling,top view,0.10,0.25,0.5\n"
      "a,front view,0.25,0.25,0.5\n"
      "a,side view,0.25,0.25,0.5\n"
      "a,back view,0.25,0.25,0.5\n"
      "a,top view,0.25,0.25,0.5\n"
      "dog,front view,0.30,0.22,0.5\n"
      "dog,side view,0.30,0.28,0.5\n"
      "dog,back view,0.25,0.28,0.5\n"
      "dog,top view,0.15,0.22,0.5\n";
  std::istringstream in(kCsv);
  return parse_table(in);
}

std::string default_config_text() {
  const ScenarioConfig c = ScenarioConfig::defaults();
  std::ostringstream out;
  for (const auto& k : keys()) out << "# " << k.help << '\n' << k.name << " = " << k.get(c) << '\n';
  return out.str();
}

}  // namespace januslab
