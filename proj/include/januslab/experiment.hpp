#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "januslab/config.hpp"
#include "januslab/distill.hpp"
#include "januslab/metrics.hpp"
#include "januslab/scoremodel.hpp"

namespace januslab {

// Reference field, templates and score model shared by every run of a
// scenario.
struct Scenario {
  ScenarioConfig config;
  Reference reference;
  std::shared_ptr<const ToyScoreModel> model;
};

Scenario build_scenario(const ScenarioConfig& config);

// One ablation arm: which debiasing knobs are on.
struct ArmSpec {
  std::string name;
  ClipMode clip = ClipMode::none;
  double psi_static = 8.0;
  bool prompt_debias = false;
};

// baseline, prompt_debias, dynamic_clip, both
std::vector<ArmSpec> grid_arms();
// trio_none, trio_static_high, trio_static_low, trio_dynamic
std::vector<ArmSpec> trio_arms(const AblationConfig& ablation);

// The scenario's run config with the arm's knobs and the seed applied.
RunConfig arm_config(const ScenarioConfig& config, const ArmSpec& arm, std::uint64_t seed);

struct ArmRun {
  std::string arm;
  std::uint64_t seed = 0;
  OptimizeResult result;
  Evaluation evaluation;
  double early_clipped = 0.0;  // mean clipped fraction over the first 10% of steps
  double late_clipped = 0.0;   // and over the last 10%
};

ArmRun run_arm(const Scenario& scenario, const ArmSpec& arm, std::uint64_t seed);

struct AblationRow {
  std::string arm;
  std::string source_arm;  // arm whose optimization produced this row
  std::uint64_t seed = 0;
  MetricReport report;
  double early_clipped = 0.0;
  double late_clipped = 0.0;
};

using ArmCallback = std::function<void(const ArmRun&)>;

// Runs every arm for every seed. Arms whose knobs coincide share one
// optimization; each still gets its own row. on_run fires once per distinct
// optimization.
std::vector<AblationRow> run_ablation(const Scenario& scenario, const std::vector<ArmSpec>& arms,
                                      const std::vector<std::uint64_t>& seeds, const ArmCallback& on_run = {});

// arm,seed,a_dist,janus_success,janus_bin_count,template_distance,
// early_clipped,late_clipped,peak_<bin>...,inside_<bin>...
void write_summary_csv(const std::vector<AblationRow>& rows, std::ostream& out);
void write_summary_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path);

// 12-view turntable strip at the metric elevation.
ImageBuffer turntable_sheet(const VoxelField& field, const ScenarioConfig& config, int views = 12);

}  // namespace januslab
