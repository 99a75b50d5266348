#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "januslab/field.hpp"
#include "januslab/image.hpp"
#include "januslab/prompt.hpp"
#include "januslab/renderer.hpp"
#include "januslab/scoremodel.hpp"

namespace januslab {

enum class ClipMode { none, fixed, dynamic };
enum class ClipStage { post_guidance, pre_guidance };

// Threshold schedule for the image-space score. `fixed` is the static
// threshold; `dynamic` ramps linearly from psi_start at step 0 to psi_end at
// max_step.
struct ClipSchedule {
  ClipMode mode = ClipMode::dynamic;
  double psi_static = 8.0;
  double psi_start = 2.0;
  double psi_end = 8.0;
  int max_step = 1;

  void validate() const;
};

// Elementwise max(min(x, psi), -psi). psi = +inf is the identity.
ImageBuffer clip_score(const ImageBuffer& g, double psi);
double dynamic_threshold(int step, const ClipSchedule& sched);
// Threshold in effect at `step`: +inf, psi_static or the dynamic ramp.
double threshold_at(int step, const ClipSchedule& sched);

struct CameraSampler {
  double elevation_min = 0.0;     // radians
  double elevation_max = 30.0 * std::numbers::pi / 180.0;
  double radius = 3.0;
  double fov_y = 0.8;
  int height = 32;
  int width = 32;
  std::uint64_t seed = 0;

  void validate() const;
};

// Azimuth uniform on [0, 2pi), elevation uniform on the range; a pure
// function of (seed, step).
Camera sample_camera(const CameraSampler& sampler, int step);

struct SigmaSchedule {
  double sigma_min = 0.05;
  double sigma_max = 0.8;
};
// Log-uniform draw on [sigma_min, sigma_max], a pure function of (seed, step).
double sample_sigma(const SigmaSchedule& schedule, std::uint64_t seed, int step);

struct RunConfig {
  int steps = 2000;
  SigmaSchedule sigma;
  GuidanceConfig guidance;
  ClipSchedule clip{ClipMode::dynamic, 8.0, 2.0, 8.0, 0};  // max_step <= 0: max(1, steps - 1)
  ClipStage clip_stage = ClipStage::post_guidance;
  int paas_samples = 1;
  AdamConfig adam;
  std::uint64_t seed = 0;
  int resolution = 32;
  InitMode init = InitMode::seeded_noise;
  CameraSampler sampler;  // its seed is replaced by `seed`
  RenderConfig render;

  Prompt prompt;
  ViewBinConfig bins = ViewBinConfig::standard();
  bool prompt_debias = false;
  PMIConfig pmi;
  std::shared_ptr<const CondProbTable> table;  // required when prompt_debias is set

  void validate() const;
  // The clip schedule with max_step filled in.
  ClipSchedule effective_clip() const;
  CameraSampler effective_sampler() const;
};

struct StepRecord {
  int step = 0;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double sigma = 0.0;
  double psi = 0.0;
  double preclip_maxabs = 0.0;
  double clipped_fraction = 0.0;
  double update_norm = 0.0;
  std::string view;
  std::string prompt;  // rendered view prompt actually used
};

// One optimization step: camera, view prompt, optional prompt debiasing,
// render, guided PAAS score, clipping, adjoint, Adam ascent. Mutates field
// and opt in place.
StepRecord distill_step(VoxelField& field, OptimizerState& opt, const ToyScoreModel& model, const RunConfig& cfg,
                        int step);

struct OptimizeResult {
  VoxelField field;
  std::vector<StepRecord> log;
};

using StepCallback = std::function<void(const StepRecord&)>;

OptimizeResult optimize(const RunConfig& cfg, const ToyScoreModel& model, const StepCallback& on_step = {});

// CSV with header step,azimuth_deg,elevation_deg,sigma,psi,preclip_maxabs,
// clipped_fraction,update_norm; an infinite psi is written as "inf".
void write_step_log(const std::vector<StepRecord>& log, std::ostream& out);
void write_step_log(const std::vector<StepRecord>& log, const std::filesystem::path& path);

// Shortest round-trippable decimal form used by every CSV writer.
std::string format_double(double value);

}  // namespace januslab
