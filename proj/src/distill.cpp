#include "januslab/distill.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "januslab/errors.hpp"
#include "januslab/random.hpp"

namespace januslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

struct ClipStats {
  double maxabs = 0.0;
  std::size_t clipped = 0;
  std::size_t total = 0;
};

void accumulate_stats(ClipStats& stats, const ImageBuffer& g, double psi) {
  for (double v : g.data()) {
    const double a = std::abs(v);
    stats.maxabs = std::max(stats.maxabs, a);
    if (a > psi) ++stats.clipped;
  }
  stats.total += g.size();
}

}  // namespace

void ClipSchedule::validate() const {
  switch (mode) {
    case ClipMode::none:
      return;
    case ClipMode::fixed:
      if (!positive_finite(psi_static)) throw InvalidArgument("clip: psi_static must be finite and > 0");
      return;
    case ClipMode::dynamic:
      if (!positive_finite(psi_start) || !positive_finite(psi_end))
        throw InvalidArgument("clip: psi_start and psi_end must be finite and > 0");
      if (psi_start > psi_end) throw InvalidArgument("clip: psi_start must not exceed psi_end");
      if (max_step < 1) throw InvalidArgument("clip: max_step must be >= 1");
      return;
  }
}

ImageBuffer clip_score(const ImageBuffer& g, double psi) {
  if (std::isnan(psi) || psi <= 0.0) throw InvalidArgument("clip_score: psi must be > 0");
  ImageBuffer out = g;
  if (std::isinf(psi)) return out;
  for (double& v : out.data()) v = std::max(std::min(v, psi), -psi);
  return out;
}

double dynamic_threshold(int step, const ClipSchedule& sched) {
  if (sched.max_step < 1) throw InvalidArgument("dynamic_threshold: max_step must be >= 1");
  if (step < 0 || step > sched.max_step) throw InvalidArgument("dynamic_threshold: step outside [0, max_step]");
  if (step == sched.max_step) return sched.psi_end;
  const double tau = static_cast<double>(step) / static_cast<double>(sched.max_step);
  return (1.0 - tau) * sched.psi_start + tau * sched.psi_end;
}

double threshold_at(int step, const ClipSchedule& sched) {
  switch (sched.mode) {
    case ClipMode::none:
      return kInf;
    case ClipMode::fixed:
      return sched.psi_static;
    case ClipMode::dynamic:
      return dynamic_threshold(step, sched);
  }
  return kInf;
}

void CameraSampler::validate() const {
  const double half_pi = std::numbers::pi / 2.0;
  if (!(elevation_min >= -half_pi && elevation_max <= half_pi && elevation_min <= elevation_max))
    throw InvalidArgument("camera sampler: elevation range must lie within [-pi/2, pi/2]");
  validate_camera(make_camera(0.0, elevation_min, radius, fov_y, height, width));
}

Camera sample_camera(const CameraSampler& sampler, int step) {
  const CounterRng rng(sampler.seed, streams::kCamera);
  const auto c = static_cast<std::uint64_t>(step) * 2;
  const double azimuth = 2.0 * std::numbers::pi * rng.uniform(c);
  const double elevation =
      sampler.elevation_min + (sampler.elevation_max - sampler.elevation_min) * rng.uniform(c + 1);
  return make_camera(azimuth, elevation, sampler.radius, sampler.fov_y, sampler.height, sampler.width);
}

double sample_sigma(const SigmaSchedule& schedule, std::uint64_t seed, int step) {
  const CounterRng rng(seed, streams::kSigma);
  const double lo = std::log(schedule.sigma_min);
  const double hi = std::log(schedule.sigma_max);
  return std::exp(lo + (hi - lo) * rng.uniform(static_cast<std::uint64_t>(step)));
}

void RunConfig::validate() const {
  if (steps < 0) throw InvalidArgument("steps must be >= 0");
  if (!positive_finite(sigma.sigma_min) || !positive_finite(sigma.sigma_max) || sigma.sigma_min > sigma.sigma_max)
    throw InvalidArgument("sigma schedule needs 0 < sigma_min <= sigma_max");
  if (!(guidance.scale >= 0.0) || !std::isfinite(guidance.scale))
    throw InvalidArgument("guidance scale must be finite and >= 0");
  effective_clip().validate();
  if (paas_samples < 1) throw InvalidArgument("paas_samples must be >= 1");
  if (!(adam.learning_rate >= 0.0) || !std::isfinite(adam.learning_rate))
    throw InvalidArgument("learning rate must be finite and >= 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw InvalidArgument("Adam decays must lie in [0, 1)");
  if (!positive_finite(adam.epsilon)) throw InvalidArgument("Adam epsilon must be > 0");
  if (resolution < 2) throw InvalidArgument("resolution must be >= 2");
  effective_sampler().validate();
  bins.validate();
  if (!(pmi.threshold > 0.0)) throw InvalidArgument("pmi threshold must be > 0");
  if (prompt_debias && !table) throw InvalidArgument("prompt debiasing needs a probability table");
}

ClipSchedule RunConfig::effective_clip() const {
  ClipSchedule c = clip;
  if (c.max_step <= 0) c.max_step = std::max(1, steps - 1);
  return c;
}

CameraSampler RunConfig::effective_sampler() const {
  CameraSampler s = sampler;
  s.seed = seed;
  return s;
}

StepRecord distill_step(VoxelField& field, OptimizerState& opt, const ToyScoreModel& model, const RunConfig& cfg,
                        int step) {
  if (step < 0 || step >= cfg.steps) throw InvalidArgument("distill_step: step outside the run");

  const Camera camera = sample_camera(cfg.effective_sampler(), step);
  StepRecord rec;
  rec.step = step;
  rec.azimuth_deg = camera.azimuth * kRadToDeg;
  rec.elevation_deg = camera.elevation * kRadToDeg;
  rec.view = assign_view_prompt(camera.azimuth, camera.elevation, cfg.bins);

  const Prompt prompt = cfg.prompt_debias ? debias_prompt(cfg.prompt, rec.view, *cfg.table, cfg.pmi) : cfg.prompt;
  rec.prompt = render_view_prompt(rec.view, prompt);
  const Condition cond{rec.view, prompt};

  const PreparedField prepared(field);
  const ImageBuffer z = render(prepared, camera, cfg.render);
  rec.sigma = sample_sigma(cfg.sigma, cfg.seed, step);
  rec.psi = threshold_at(step, cfg.effective_clip());

  const std::uint64_t noise_seed = CounterRng(cfg.seed, streams::kPaas).bits(static_cast<std::uint64_t>(step));
  const double s = cfg.guidance.scale;
  ClipStats stats;
  ImageBuffer g;
  if (s == 0.0) {
    g = model.paas_estimate(z, rec.sigma, cond, cfg.paas_samples, noise_seed);
    accumulate_stats(stats, g, rec.psi);
    g = clip_score(g, rec.psi);
  } else {
    PaasEstimate pair = model.paas_pair(z, rec.sigma, cond, cfg.paas_samples, noise_seed);
    if (cfg.clip_stage == ClipStage::pre_guidance) {
      accumulate_stats(stats, pair.conditional, rec.psi);
      accumulate_stats(stats, pair.unconditional, rec.psi);
      pair.conditional = clip_score(pair.conditional, rec.psi);
      pair.unconditional = clip_score(pair.unconditional, rec.psi);
    }
    g = std::move(pair.conditional);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * (g[i] - pair.unconditional[i]);
    if (cfg.clip_stage == ClipStage::post_guidance) {
      accumulate_stats(stats, g, rec.psi);
      g = clip_score(g, rec.psi);
    }
  }
  rec.preclip_maxabs = stats.maxabs;
  rec.clipped_fraction = stats.total == 0 ? 0.0 : static_cast<double>(stats.clipped) / stats.total;
  if (!g.all_finite()) throw NonFiniteError("non-finite score at step " + std::to_string(step));

  const FieldGradient grad = render_vjp(prepared, camera, cfg.render, g);
  if (!grad.all_finite()) throw NonFiniteError("non-finite field gradient at step " + std::to_string(step));

  const std::vector<double> density_before(field.raw_density().begin(), field.raw_density().end());
  const std::vector<double> color_before(field.raw_color().begin(), field.raw_color().end());
  apply_update(field, grad, opt);
  double sq = 0.0;
  for (std::size_t i = 0; i < density_before.size(); ++i) {
    const double d = field.raw_density()[i] - density_before[i];
    sq += d * d;
  }
  for (std::size_t i = 0; i < color_before.size(); ++i) {
    const double d = field.raw_color()[i] - color_before[i];
    sq += d * d;
  }
  rec.update_norm = std::sqrt(sq);
  return rec;
}

OptimizeResult optimize(const RunConfig& cfg, const ToyScoreModel& model, const StepCallback& on_step) {
  cfg.validate();
  OptimizeResult result{new_field(cfg.resolution, cfg.init, cfg.seed), {}};
  OptimizerState opt(result.field, cfg.adam);
  result.log.reserve(static_cast<std::size_t>(cfg.steps));
  for (int step = 0; step < cfg.steps; ++step) {
    result.log.push_back(distill_step(result.field, opt, model, cfg, step));
    if (on_step) on_step(result.log.back());
  }
  return result;
}

std::string format_double(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_step_log(const std::vector<StepRecord>& log, std::ostream& out) {
  out << "step,azimuth_deg,elevation_deg,sigma,psi,preclip_maxabs,clipped_fraction,update_norm\n";
  for (const auto& r : log) {
    out << r.step << ',' << format_double(r.azimuth_deg) << ',' << format_double(r.elevation_deg) << ','
        << format_double(r.sigma) << ',' << format_double(r.psi) << ',' << format_double(r.preclip_maxabs) << ','
        << format_double(r.clipped_fraction) << ',' << format_double(r.update_norm) << '\n';
  }
}

void write_step_log(const std::vector<StepRecord>& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_step_log(log, out);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace januslab
