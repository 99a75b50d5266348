#include "januslab/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <tuple>

#include "januslab/errors.hpp"

namespace januslab {

namespace {

std::string column_name(const std::string& prefix, std::string bin) {
  std::replace(bin.begin(), bin.end(), ' ', '_');
  return prefix + bin;
}

// Identical knobs give identical optimizations.
using ArmKey = std::tuple<int, double, bool>;

ArmKey key_of(const ArmSpec& arm) {
  const double psi = arm.clip == ClipMode::fixed ? arm.psi_static : 0.0;
  return {static_cast<int>(arm.clip), psi, arm.prompt_debias};
}

}  // namespace

Scenario build_scenario(const ScenarioConfig& config) {
  Scenario s{config, build_reference(config.scene, config.reference, config.bins(), config.bias), nullptr};
  s.model = std::make_shared<const ToyScoreModel>(s.reference.templates, config.bias);
  return s;
}

std::vector<ArmSpec> grid_arms() {
  return {
      {"baseline", ClipMode::none, 8.0, false},
      {"prompt_debias", ClipMode::none, 8.0, true},
      {"dynamic_clip", ClipMode::dynamic, 8.0, false},
      {"both", ClipMode::dynamic, 8.0, true},
  };
}

std::vector<ArmSpec> trio_arms(const AblationConfig& ablation) {
  const bool pd = ablation.trio_prompt_debias;
  return {
      {"trio_none", ClipMode::none, ablation.static_high, pd},
      {"trio_static_high", ClipMode::fixed, ablation.static_high, pd},
      {"trio_static_low", ClipMode::fixed, ablation.static_low, pd},
      {"trio_dynamic", ClipMode::dynamic, ablation.static_high, pd},
  };
}

RunConfig arm_config(const ScenarioConfig& config, const ArmSpec& arm, std::uint64_t seed) {
  RunConfig rc = config.run;
  rc.seed = seed;
  rc.clip.mode = arm.clip;
  if (arm.clip == ClipMode::fixed) rc.clip.psi_static = arm.psi_static;
  rc.prompt_debias = arm.prompt_debias;
  rc.validate();
  return rc;
}

ArmRun run_arm(const Scenario& scenario, const ArmSpec& arm, std::uint64_t seed) {
  OptimizeResult result = optimize(arm_config(scenario.config, arm, seed), *scenario.model);
  Evaluation evaluation = evaluate_field(result.field, scenario.reference.templates, scenario.config.bins(),
                                         scenario.config.metrics, arm.name + "_s" + std::to_string(seed));
  ArmRun run{arm.name, seed, std::move(result), std::move(evaluation)};
  const auto& log = run.result.log;
  if (!log.empty()) {
    const std::size_t n = std::max<std::size_t>(1, log.size() / 10);
    for (std::size_t i = 0; i < n; ++i) {
      run.early_clipped += log[i].clipped_fraction;
      run.late_clipped += log[log.size() - 1 - i].clipped_fraction;
    }
    run.early_clipped /= static_cast<double>(n);
    run.late_clipped /= static_cast<double>(n);
  }
  return run;
}

std::vector<AblationRow> run_ablation(const Scenario& scenario, const std::vector<ArmSpec>& arms,
                                      const std::vector<std::uint64_t>& seeds, const ArmCallback& on_run) {
  std::vector<AblationRow> rows;
  rows.reserve(arms.size() * seeds.size());
  for (std::uint64_t seed : seeds) {
    std::map<ArmKey, AblationRow> done;
    for (const auto& arm : arms) {
      const ArmKey key = key_of(arm);
      auto it = done.find(key);
      if (it == done.end()) {
        const ArmRun run = run_arm(scenario, arm, seed);
        if (on_run) on_run(run);
        it = done.emplace(key, AblationRow{arm.name, arm.name, seed, run.evaluation.report, run.early_clipped,
                                            run.late_clipped})
                 .first;
      }
      AblationRow row = it->second;
      row.arm = arm.name;
      row.report.run_id = arm.name + "_s" + std::to_string(seed);
      rows.push_back(std::move(row));
    }
  }
  // arm-major order reads better in the summary
  std::stable_sort(rows.begin(), rows.end(), [&](const AblationRow& a, const AblationRow& b) {
    auto pos = [&](const std::string& name) {
      return std::find_if(arms.begin(), arms.end(), [&](const ArmSpec& s) { return s.name == name; }) - arms.begin();
    };
    return pos(a.arm) < pos(b.arm);
  });
  return rows;
}

void write_summary_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
  out << "arm,seed,a_dist,janus_success,janus_bin_count,template_distance,early_clipped,late_clipped";
  const std::vector<std::string> bins = rows.empty() ? std::vector<std::string>{} : rows.front().report.bin_names;
  for (const auto& b : bins) out << ',' << column_name("peak_", b);
  for (const auto& b : bins) out << ',' << column_name("inside_", b);
  out << '\n';
  for (const auto& r : rows) {
    out << r.arm << ',' << r.seed << ',' << format_double(r.report.a_dist) << ','
        << (r.report.janus_success ? "true" : "false") << ',' << r.report.janus_bin_count << ','
        << format_double(r.report.template_distance) << ',' << format_double(r.early_clipped) << ','
        << format_double(r.late_clipped);
    for (double v : r.report.alignment_peaks) out << ',' << format_double(v);
    for (int v : r.report.peak_inside) out << ',' << v;
    out << '\n';
  }
}

void write_summary_csv(const std::vector<AblationRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_summary_csv(rows, out);
}

ImageBuffer turntable_sheet(const VoxelField& field, const ScenarioConfig& config, int views) {
  const Turntable tt = turntable(field, views, config.metrics.elevation, config.metrics.camera, config.metrics.render);
  return contact_sheet(tt.images);
}

}  // namespace januslab
