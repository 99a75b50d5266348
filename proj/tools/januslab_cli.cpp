// januslab command-line runner.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "januslab/config.hpp"
#include "januslab/errors.hpp"
#include "januslab/experiment.hpp"
#include "januslab/parallel.hpp"

namespace fs = std::filesystem;
using namespace januslab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<long long> seed;
  std::optional<int> threads;
};

ScenarioConfig load_scenario(const GlobalOptions& g) {
  ScenarioConfig cfg = g.config.empty() ? ScenarioConfig::defaults() : ScenarioConfig::load(g.config);
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (g.seed) {
    if (*g.seed < 0) throw ConfigError("--seed must be >= 0");
    cfg.run.seed = static_cast<std::uint64_t>(*g.seed);
  }
  return cfg;
}

fs::path prepare_output(const ScenarioConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir))
    throw ConfigError("cannot create output directory " + cfg.output_dir.string());
  return cfg.output_dir;
}

void configure_threads(const GlobalOptions& g) {
  int threads = 1;
  if (g.threads) {
    threads = *g.threads;
  } else if (const char* env = std::getenv("JLAB_THREADS"); env && *env) {
    try {
      threads = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("JLAB_THREADS is not an integer: ") + env);
    }
  }
  if (threads < 1) throw ConfigError("thread count must be >= 1");
  set_thread_count(threads);
}

int cmd_optimize(const GlobalOptions& g) {
  const ScenarioConfig cfg = load_scenario(g);
  const fs::path out = prepare_output(cfg);
  const Scenario scenario = build_scenario(cfg);
  const int every = std::max(1, cfg.run.steps / 20);
  const OptimizeResult result = optimize(cfg.run, *scenario.model, [&](const StepRecord& r) {
    if ((r.step + 1) % every == 0)
      std::fprintf(stderr, "step %d/%d  sigma %.3f  clipped %.3f\n", r.step + 1, cfg.run.steps, r.sigma,
                   r.clipped_fraction);
  });
  save_field(result.field, out / "field.jlab");
  write_step_log(result.log, out / "steps.csv");
  write_ppm(turntable_sheet(result.field, cfg), out / "turntable.ppm");
  std::cout << (out / "field.jlab").string() << '\n';
  return kExitOk;
}

int cmd_metrics(const GlobalOptions& g, const std::string& field_path, bool use_reference) {
  const ScenarioConfig cfg = load_scenario(g);
  if (!use_reference) {
    if (field_path.empty()) throw ConfigError("metrics needs --field or --reference");
    if (!fs::is_regular_file(field_path)) throw ConfigError("field file not found: " + field_path);
  }
  const fs::path out = prepare_output(cfg);
  const Scenario scenario = build_scenario(cfg);
  const VoxelField field = use_reference ? scenario.reference.field : load_field(field_path);
  const std::string run_id = use_reference ? "reference" : fs::path(field_path).stem().string();
  const Evaluation ev = evaluate_field(field, scenario.reference.templates, cfg.bins(), cfg.metrics, run_id);
  write_report_csv(std::span<const MetricReport>(&ev.report, 1), out / "metrics.csv");
  write_curve_csv(ev.curve, out / "curve.csv");
  write_curve_svg(ev.curve, cfg.bins(), out / "curve.svg");
  std::cout << "a_dist " << format_double(ev.report.a_dist) << "\njanus_bin_count " << ev.report.janus_bin_count
            << "\njanus_success " << (ev.report.janus_success ? "true" : "false") << '\n';
  return kExitOk;
}

int cmd_debias(const GlobalOptions& g, const std::string& text, const std::string& view,
               const std::string& table_path, const std::vector<std::string>& protect) {
  ScenarioConfig cfg = load_scenario(g);
  CondProbTable table;
  if (!table_path.empty()) {
    if (!fs::is_regular_file(table_path)) throw ConfigError("table not found: " + table_path);
    try {
      table = load_table(table_path, cfg.run.pmi.default_prior);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  } else {
    table = cfg.run.table ? *cfg.run.table : example_table();
  }
  const Prompt prompt = Prompt::parse(text, protect);
  std::vector<WordDecision> decisions;
  try {
    decisions = explain_debias(prompt, view, table, cfg.run.pmi);
  } catch (const LookupError& e) {
    throw ConfigError(e.what());
  }
  std::printf("word,protected,pmi,normalized_pmi,kept\n");
  for (const auto& d : decisions) {
    std::printf("%s,%s,%.4f,%.4f,%s\n", d.word.c_str(), d.is_protected ? "true" : "false", d.pmi, d.normalized,
                d.removed ? "false" : "true");
  }
  const Prompt kept = debias_prompt(prompt, view, table, cfg.run.pmi);
  std::fprintf(stderr, "%s\n", render_view_prompt(view, kept).c_str());
  return kExitOk;
}

int cmd_ablate(const GlobalOptions& g) {
  const ScenarioConfig cfg = load_scenario(g);
  const fs::path out = prepare_output(cfg);
  const fs::path sheets = out / "sheets";
  fs::create_directories(sheets);
  const Scenario scenario = build_scenario(cfg);
  std::vector<ArmSpec> arms = grid_arms();
  for (auto& a : trio_arms(cfg.ablation)) arms.push_back(a);
  const auto rows = run_ablation(scenario, arms, cfg.ablation.seeds, [&](const ArmRun& run) {
    const std::string tag = run.arm + "_s" + std::to_string(run.seed);
    std::fprintf(stderr, "%s  a_dist %.4f  janus %d  success %s\n", tag.c_str(), run.evaluation.report.a_dist,
                 run.evaluation.report.janus_bin_count, run.evaluation.report.janus_success ? "yes" : "no");
    write_ppm(turntable_sheet(run.result.field, cfg), sheets / (tag + ".ppm"));
  });
  for (const auto& r : rows) {
    if (r.source_arm == r.arm) continue;
    const std::string seed = "_s" + std::to_string(r.seed);
    fs::copy_file(sheets / (r.source_arm + seed + ".ppm"), sheets / (r.arm + seed + ".ppm"),
                  fs::copy_options::overwrite_existing);
  }
  write_summary_csv(rows, out / "summary.csv");
  std::vector<MetricReport> reports;
  for (const auto& r : rows) reports.push_back(r.report);
  write_report_csv(reports, out / "metrics.csv");
  std::cout << (out / "summary.csv").string() << '\n';
  return kExitOk;
}

int cmd_render(const GlobalOptions& g, const std::string& field_path, int views, bool templates) {
  const ScenarioConfig cfg = load_scenario(g);
  if (field_path.empty() && !templates) throw ConfigError("render needs --field and/or --templates");
  if (!field_path.empty() && !fs::is_regular_file(field_path))
    throw ConfigError("field file not found: " + field_path);
  if (views < 2) throw ConfigError("--views must be >= 2");
  const fs::path out = prepare_output(cfg);
  if (!field_path.empty()) {
    const VoxelField field = load_field(field_path);
    write_ppm(turntable_sheet(field, cfg, views), out / "render.ppm");
  }
  if (templates) {
    const Reference ref = build_reference(cfg.scene, cfg.reference, cfg.bins(), cfg.bias);
    ref.templates.export_ppm(out / "templates");
    write_ppm(turntable_sheet(ref.field, cfg, views), out / "reference.ppm");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"januslab: Janus-artifact simulator for score distillation"};
  app.set_version_flag("--version", "januslab 0.1.0");
  GlobalOptions g;
  bool print_config = false;
  app.add_option("--config", g.config, "scenario config file (key = value)");
  app.add_option("--out", g.out, "output directory (overrides output.dir)");
  app.add_option("--seed", g.seed, "seed (overrides run.seed)");
  app.add_option("--threads", g.threads, "worker threads (fallback: JLAB_THREADS)");
  app.add_flag("--print-config", print_config, "print every config key with its default and exit");
  app.require_subcommand(0, 1);

  auto* optimize_cmd = app.add_subcommand("optimize", "run one distillation and write field, log and contact sheet");

  std::string field_path;
  bool use_reference = false;
  auto* metrics_cmd = app.add_subcommand("metrics", "evaluate a field against the scenario templates");
  metrics_cmd->add_option("--field", field_path, "field file");
  metrics_cmd->add_flag("--reference", use_reference, "evaluate the hidden reference field instead");

  std::string prompt_text = "a smiling dog";
  std::string view{kBackView};
  std::string table_path;
  std::vector<std::string> protect;
  auto* debias_cmd = app.add_subcommand("debias-prompt", "print per-word PMI verdicts for one view as CSV");
  debias_cmd->add_option("--prompt", prompt_text, "user prompt");
  debias_cmd->add_option("--view", view, "view prompt name");
  debias_cmd->add_option("--table", table_path, "probability table CSV (default: config or built-in)");
  debias_cmd->add_option("--protect", protect, "protected word (repeatable)");

  auto* ablate_cmd = app.add_subcommand("ablate", "run the debiasing grid and the clipping trio over the seed list");

  int views = 12;
  bool templates = false;
  auto* render_cmd = app.add_subcommand("render", "render a turntable strip and/or export templates");
  render_cmd->add_option("--field", field_path, "field file");
  render_cmd->add_option("--views", views, "number of turntable views");
  render_cmd->add_flag("--templates", templates, "export the reference templates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    configure_threads(g);
    if (print_config) {
      std::cout << default_config_text();
      return kExitOk;
    }
    if (*optimize_cmd) return cmd_optimize(g);
    if (*metrics_cmd) return cmd_metrics(g, field_path, use_reference);
    if (*debias_cmd) return cmd_debias(g, prompt_text, view, table_path, protect);
    if (*ablate_cmd) return cmd_ablate(g);
    if (*render_cmd) return cmd_render(g, field_path, views, templates);
    std::cerr << app.help();
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
