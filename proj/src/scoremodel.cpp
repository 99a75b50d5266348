#include "januslab/scoremodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include "januslab/errors.hpp"
#include "januslab/random.hpp"

namespace januslab {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double squared_distance(const ImageBuffer& a, const ImageBuffer& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double log_sum_exp(const std::vector<double>& a) {
  double m = kNegInf;
  for (double v : a) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : a) s += std::exp(v - m);
  return m + std::log(s);
}

void softmax_inplace(std::vector<double>& a) {
  const double lse = log_sum_exp(a);
  for (double& v : a) v = std::exp(v - lse);
}

double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

double circular_gap(double a_rad, double b_rad) {
  double d = std::fmod(std::abs(a_rad - b_rad), 2.0 * std::numbers::pi);
  return std::min(d, 2.0 * std::numbers::pi - d);
}

std::string file_stem(std::string name) {
  std::replace(name.begin(), name.end(), ' ', '-');
  return name;
}

// Keys for every subset of the bias words; index = bitmask over word order.
std::vector<std::string> subset_keys(const std::vector<WordBias>& words) {
  const std::size_t n = words.size();
  std::vector<std::string> keys;
  keys.reserve(std::size_t{1} << n);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    std::string key;
    for (std::size_t w = 0; w < n; ++w) {
      if ((mask >> w) & 1U) {
        if (!key.empty()) key += '+';
        key += words[w].word;
      }
    }
    keys.push_back(key.empty() ? std::string(kCleanKey) : key);
  }
  return keys;
}

PatchRect face_patch_from(const ImageBuffer& with_face, const ImageBuffer& without_face) {
  int y0 = with_face.height(), x0 = with_face.width(), y1 = -1, x1 = -1;
  for (int y = 0; y < with_face.height(); ++y) {
    for (int x = 0; x < with_face.width(); ++x) {
      double diff = 0.0;
      for (int c = 0; c < 3; ++c) diff = std::max(diff, std::abs(with_face.at(y, x, c) - without_face.at(y, x, c)));
      if (diff > 0.1) {
        y0 = std::min(y0, y);
        x0 = std::min(x0, x);
        y1 = std::max(y1, y);
        x1 = std::max(x1, x);
      }
    }
  }
  if (y1 < 0) throw InvalidArgument("build_reference: the face is not visible from the canonical view");
  return {y0, x0, y1 + 1, x1 + 1};
}

void blend_patch(ImageBuffer& target, const ImageBuffer& source, const PatchRect& rect, double gamma) {
  for (int y = rect.y0; y < rect.y1; ++y)
    for (int x = rect.x0; x < rect.x1; ++x)
      for (int c = 0; c < 3; ++c) target.at(y, x, c) = (1.0 - gamma) * target.at(y, x, c) + gamma * source.at(y, x, c);
}

}  // namespace

void BiasConfig::validate() const {
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("bias: beta must lie in [0, 1]");
  if (canonical_bin.empty()) throw InvalidArgument("bias: canonical_bin is empty");
  std::set<std::string> seen;
  for (const auto& wb : word_bias) {
    if (wb.word.empty()) throw InvalidArgument("bias: empty word in word_bias");
    if (!(wb.blend >= 0.0 && wb.blend <= 1.0)) throw InvalidArgument("bias: blend for '" + wb.word + "' outside [0, 1]");
    if (!seen.insert(wb.word).second) throw InvalidArgument("bias: duplicate word '" + wb.word + "'");
  }
  if (word_bias.size() > 8) throw InvalidArgument("bias: at most 8 biased words");
}

TemplateSet::TemplateSet(std::vector<std::string> bins, std::vector<std::string> keys, std::string canonical_bin,
                         PatchRect face_patch)
    : bins_(std::move(bins)),
      keys_(std::move(keys)),
      canonical_bin_(std::move(canonical_bin)),
      face_patch_(face_patch),
      modes_(bins_.size(), std::vector<std::vector<ImageBuffer>>(keys_.size())),
      azimuths_(bins_.size()) {
  if (bins_.empty()) throw InvalidArgument("templates: no bins");
  if (keys_.empty()) throw InvalidArgument("templates: no keys");
  if (!has_bin(canonical_bin_)) throw InvalidArgument("templates: canonical bin '" + canonical_bin_ + "' is not a bin");
}

TemplateSet TemplateSet::single(const ImageBuffer& image, std::string bin) {
  TemplateSet t({bin}, {std::string(kCleanKey)}, bin, PatchRect{0, 0, image.height(), image.width()});
  t.set_modes(bin, kCleanKey, {image}, {0.0});
  return t;
}

void TemplateSet::set_modes(std::string_view bin, std::string_view key, std::vector<ImageBuffer> images,
                            std::vector<double> azimuths) {
  if (images.empty()) throw InvalidArgument("templates: a condition needs at least one mode");
  if (images.size() != azimuths.size()) throw InvalidArgument("templates: one azimuth per mode");
  const std::size_t b = bin_index(bin);
  const std::size_t k = key_index(key);
  if (height_ == 0) {
    height_ = images.front().height();
    width_ = images.front().width();
  }
  for (auto& img : images) {
    if (img.height() != height_ || img.width() != width_) throw InvalidArgument("templates: shape mismatch");
    img.set_kind(ImageKind::radiance);
  }
  if (!azimuths_[b].empty() && azimuths_[b].size() != azimuths.size())
    throw InvalidArgument("templates: every key of a bin needs the same number of modes");
  azimuths_[b] = std::move(azimuths);
  modes_[b][k] = std::move(images);
}

std::size_t TemplateSet::bin_index(std::string_view bin) const {
  for (std::size_t i = 0; i < bins_.size(); ++i)
    if (bins_[i] == bin) return i;
  throw InvalidArgument("unknown view bin '" + std::string(bin) + "'");
}

std::size_t TemplateSet::key_index(std::string_view key) const {
  for (std::size_t i = 0; i < keys_.size(); ++i)
    if (keys_[i] == key) return i;
  throw InvalidArgument("unknown word key '" + std::string(key) + "'");
}

bool TemplateSet::has_bin(std::string_view bin) const noexcept {
  return std::find(bins_.begin(), bins_.end(), bin) != bins_.end();
}

const std::vector<ImageBuffer>& TemplateSet::modes(std::size_t bin, std::size_t key) const {
  if (bin >= bins_.size() || key >= keys_.size()) throw InvalidArgument("templates: index out of range");
  return modes_[bin][key];
}

const std::vector<ImageBuffer>& TemplateSet::modes(std::string_view bin, std::string_view key) const {
  return modes(bin_index(bin), key_index(key));
}

const std::vector<double>& TemplateSet::mode_azimuths(std::size_t bin) const {
  if (bin >= bins_.size()) throw InvalidArgument("templates: index out of range");
  return azimuths_[bin];
}

const ImageBuffer& TemplateSet::pose_true(std::string_view bin, double azimuth) const {
  const std::size_t b = bin_index(bin);
  const auto& images = modes(b, key_index(kCleanKey));
  if (images.empty()) throw InvalidArgument("templates: bin '" + std::string(bin) + "' has no modes");
  std::size_t best = 0;
  for (std::size_t i = 1; i < images.size(); ++i)
    if (circular_gap(azimuths_[b][i], azimuth) < circular_gap(azimuths_[b][best], azimuth)) best = i;
  return images[best];
}

const ImageBuffer& TemplateSet::canonical() const {
  const auto& images = modes(canonical_bin_, kCleanKey);
  if (images.empty()) throw InvalidArgument("templates: canonical bin has no modes");
  return images.front();
}

std::string TemplateSet::key_for(const Prompt& prompt, const BiasConfig& bias) const {
  std::string key;
  for (const auto& wb : bias.word_bias) {
    if (!prompt.contains(wb.word)) continue;
    if (!key.empty()) key += '+';
    key += wb.word;
  }
  return key.empty() ? std::string(kCleanKey) : key;
}

void TemplateSet::validate() const {
  for (std::size_t b = 0; b < bins_.size(); ++b) {
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      const auto& images = modes_[b][k];
      if (images.empty()) throw InvalidArgument("templates: missing modes for (" + bins_[b] + ", " + keys_[k] + ")");
      for (const auto& img : images) {
        for (double v : img.data())
          if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("templates: value outside [0, 1] in " + bins_[b]);
      }
    }
  }
}

void TemplateSet::export_ppm(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (std::size_t b = 0; b < bins_.size(); ++b) {
    for (std::size_t k = 0; k < keys_.size(); ++k) {
      if (modes_[b][k].empty()) continue;
      write_ppm(contact_sheet(modes_[b][k]), dir / (file_stem(bins_[b]) + "_" + file_stem(keys_[k]) + ".ppm"));
    }
  }
}

Reference build_reference(const SceneSpec& scene, const ReferenceOptions& options, const ViewBinConfig& bins,
                          const BiasConfig& bias) {
  if (bins.bins.empty()) throw InvalidArgument("build_reference: no view bins");
  bins.validate();
  bias.validate();
  if (!(options.template_spacing_deg > 0.0)) throw InvalidArgument("build_reference: template spacing must be > 0");

  VoxelField field = build_scene_field(scene, options.resolution);
  Camera base = options.camera;
  auto render_at = [&](const VoxelField& f, double azimuth_deg, double elevation) {
    return render(f, make_camera(wrap_deg(azimuth_deg) * kDeg, elevation, base.radius, base.fov_y, base.height,
                                 base.width),
                  options.render);
  };

  const std::vector<std::string> names = bins.names();
  if (std::find(names.begin(), names.end(), bias.canonical_bin) == names.end())
    throw InvalidArgument("build_reference: canonical bin '" + bias.canonical_bin + "' is not configured");
  const ViewBin* canonical_bin = bins.find(bias.canonical_bin);
  if (canonical_bin == nullptr) throw InvalidArgument("build_reference: canonical bin must be an azimuth bin");
  const double canonical_az = canonical_bin->intervals.front().center_deg();

  SceneSpec faceless = scene;
  faceless.with_face = false;
  const PatchRect patch = face_patch_from(render_at(field, canonical_az, options.template_elevation),
                                          render_at(build_scene_field(faceless, options.resolution), canonical_az,
                                                    options.template_elevation));

  const std::vector<std::string> keys = subset_keys(bias.word_bias);
  TemplateSet templates(names, keys, bias.canonical_bin, patch);

  std::vector<std::vector<ImageBuffer>> clean(names.size());
  std::vector<std::vector<double>> azimuths(names.size());
  for (std::size_t b = 0; b < names.size(); ++b) {
    const ViewBin* vb = bins.find(names[b]);
    if (vb == nullptr) {  // top view
      clean[b].push_back(render_at(field, 0.0, options.top_elevation));
      azimuths[b].push_back(0.0);
      continue;
    }
    for (const auto& interval : vb->intervals) {
      const double width = interval.hi_deg - interval.lo_deg;
      const int pieces = std::max(1, static_cast<int>(std::ceil(width / options.template_spacing_deg - 1e-9)));
      for (int j = 0; j < pieces; ++j) {
        const double az = wrap_deg(interval.lo_deg + (j + 0.5) * width / pieces);
        clean[b].push_back(render_at(field, az, options.template_elevation));
        azimuths[b].push_back(az * kDeg);
      }
    }
  }
  const std::size_t canon = templates.bin_index(bias.canonical_bin);
  const ImageBuffer face_source = clean[canon].front();

  for (std::size_t b = 0; b < names.size(); ++b) {
    for (std::size_t mask = 0; mask < keys.size(); ++mask) {
      std::vector<ImageBuffer> images = clean[b];
      if (b != canon) {
        for (std::size_t w = 0; w < bias.word_bias.size(); ++w) {
          if (!((mask >> w) & 1U)) continue;
          for (auto& img : images) blend_patch(img, face_source, patch, bias.word_bias[w].blend);
        }
      }
      templates.set_modes(names[b], keys[mask], std::move(images), azimuths[b]);
    }
  }
  templates.validate();
  return {std::move(field), std::move(templates)};
}

ToyScoreModel::ToyScoreModel(TemplateSet templates, BiasConfig bias)
    : templates_(std::move(templates)), bias_(std::move(bias)) {
  bias_.validate();
  templates_.validate();
  canonical_bin_ = templates_.bin_index(bias_.canonical_bin);
  for (const auto& key : subset_keys(bias_.word_bias)) {
    if (std::find(templates_.keys().begin(), templates_.keys().end(), key) == templates_.keys().end())
      throw InvalidArgument("score model: templates lack word key '" + key + "'");
  }
}

ToyScoreModel::ConditionIndex ToyScoreModel::resolve(const Condition& cond) const {
  return {templates_.bin_index(cond.view_bin), templates_.key_index(templates_.key_for(cond.prompt, bias_))};
}

void ToyScoreModel::check_inputs(const ImageBuffer& z, double sigma) const {
  if (z.height() != templates_.height() || z.width() != templates_.width())
    throw InvalidArgument("score model: image shape does not match the templates");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("score model: sigma must be finite and > 0");
  if (!z.all_finite()) throw InvalidArgument("score model: image has non-finite values");
}

std::vector<ToyScoreModel::Component> ToyScoreModel::components(ConditionIndex c) const {
  std::vector<Component> out;
  const auto& own = templates_.modes(c.bin, c.key);
  const double beta = c.bin == canonical_bin_ ? 0.0 : bias_.beta;
  if (beta < 1.0) {
    const double lw = std::log((1.0 - beta) / static_cast<double>(own.size()));
    for (const auto& m : own) out.push_back({&m, lw});
  }
  if (beta > 0.0) {
    const auto& canon = templates_.modes(canonical_bin_, c.key);
    const double lw = std::log(beta / static_cast<double>(canon.size()));
    for (const auto& m : canon) out.push_back({&m, lw});
  }
  return out;
}

std::vector<ToyScoreModel::Component> ToyScoreModel::marginal_components() const {
  // Identical means from different conditions are merged.
  std::vector<Component> merged;
  const double log_pi = -std::log(static_cast<double>(condition_count()));
  for (std::size_t b = 0; b < templates_.bins().size(); ++b) {
    for (std::size_t k = 0; k < templates_.keys().size(); ++k) {
      for (const auto& comp : components({b, k})) {
        auto it = std::find_if(merged.begin(), merged.end(), [&](const Component& m) { return m.mean == comp.mean; });
        const double lw = comp.log_weight + log_pi;
        if (it == merged.end()) {
          merged.push_back({comp.mean, lw});
        } else {
          const double hi = std::max(it->log_weight, lw);
          it->log_weight = hi + std::log(std::exp(it->log_weight - hi) + std::exp(lw - hi));
        }
      }
    }
  }
  return merged;
}

namespace {

struct MixtureEval {
  std::vector<double> logits;  // log w_i - |z - mu_i|^2 / (2 sigma^2)
  double log_norm;             // -(D/2) log(2 pi sigma^2)
};

template <class Components>
MixtureEval evaluate(const Components& comps, const ImageBuffer& z, double sigma) {
  MixtureEval e;
  e.logits.reserve(comps.size());
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (const auto& c : comps) e.logits.push_back(c.log_weight - squared_distance(z, *c.mean) * inv);
  e.log_norm = -0.5 * static_cast<double>(z.size()) * std::log(2.0 * std::numbers::pi * sigma * sigma);
  return e;
}

template <class Components>
ImageBuffer posterior_mean(const Components& comps, const ImageBuffer& z, double sigma) {
  MixtureEval e = evaluate(comps, z, sigma);
  softmax_inplace(e.logits);
  ImageBuffer d(z.height(), z.width(), ImageKind::radiance);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double r = e.logits[i];
    if (r == 0.0) continue;
    const ImageBuffer& mu = *comps[i].mean;
    for (std::size_t p = 0; p < d.size(); ++p) d[p] += r * mu[p];
  }
  return d;
}

template <class Components>
ImageBuffer mixture_score(const Components& comps, const ImageBuffer& z, double sigma) {
  MixtureEval e = evaluate(comps, z, sigma);
  softmax_inplace(e.logits);
  ImageBuffer s(z.height(), z.width(), ImageKind::gradient);
  const double inv = 1.0 / (sigma * sigma);
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const double r = e.logits[i];
    if (r == 0.0) continue;
    const ImageBuffer& mu = *comps[i].mean;
    for (std::size_t p = 0; p < s.size(); ++p) s[p] += r * (mu[p] - z[p]) * inv;
  }
  return s;
}

template <class Components>
double mixture_log_density(const Components& comps, const ImageBuffer& z, double sigma) {
  const MixtureEval e = evaluate(comps, z, sigma);
  return log_sum_exp(e.logits) + e.log_norm;
}

}  // namespace

ImageBuffer ToyScoreModel::conditional_score(const ImageBuffer& z, double sigma, const Condition& cond) const {
  check_inputs(z, sigma);
  return mixture_score(components(resolve(cond)), z, sigma);
}

ImageBuffer ToyScoreModel::unconditional_score(const ImageBuffer& z, double sigma) const {
  check_inputs(z, sigma);
  return mixture_score(marginal_components(), z, sigma);
}

ImageBuffer ToyScoreModel::cfg_score(const ImageBuffer& z, double sigma, const Condition& cond,
                                     const GuidanceConfig& guidance) const {
  if (!(guidance.scale >= 0.0) || !std::isfinite(guidance.scale))
    throw InvalidArgument("guidance scale must be finite and >= 0");
  ImageBuffer out = conditional_score(z, sigma, cond);
  if (guidance.scale == 0.0) return out;
  const ImageBuffer uncond = unconditional_score(z, sigma);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += guidance.scale * (out[i] - uncond[i]);
  return out;
}

ImageBuffer ToyScoreModel::denoise(const ImageBuffer& z, double sigma, const Condition& cond) const {
  check_inputs(z, sigma);
  return posterior_mean(components(resolve(cond)), z, sigma);
}

ImageBuffer ToyScoreModel::denoise_unconditional(const ImageBuffer& z, double sigma) const {
  check_inputs(z, sigma);
  return posterior_mean(marginal_components(), z, sigma);
}

double ToyScoreModel::log_density(const ImageBuffer& z, double sigma, const Condition& cond) const {
  check_inputs(z, sigma);
  return mixture_log_density(components(resolve(cond)), z, sigma);
}

double ToyScoreModel::log_marginal(const ImageBuffer& z, double sigma) const {
  check_inputs(z, sigma);
  return mixture_log_density(marginal_components(), z, sigma);
}

ImageBuffer ToyScoreModel::paas_estimate(const ImageBuffer& z, double sigma, const Condition& cond, int n_samples,
                                         std::uint64_t seed) const {
  if (n_samples < 1) throw InvalidArgument("paas: n_samples must be >= 1");
  check_inputs(z, sigma);
  const auto comps = components(resolve(cond));
  const CounterRng rng(seed, streams::kPaas);
  ImageBuffer acc(z.height(), z.width(), ImageKind::gradient);
  ImageBuffer noisy(z.height(), z.width(), ImageKind::radiance);
  for (int k = 0; k < n_samples; ++k) {
    const std::uint64_t base = static_cast<std::uint64_t>(k) * z.size();
    for (std::size_t i = 0; i < z.size(); ++i) noisy[i] = z[i] + sigma * rng.normal(base + i);
    const ImageBuffer d = posterior_mean(comps, noisy, sigma);
    for (std::size_t i = 0; i < z.size(); ++i) acc[i] += d[i] - z[i];
  }
  const double scale = 1.0 / (static_cast<double>(n_samples) * sigma * sigma);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= scale;
  return acc;
}

PaasEstimate ToyScoreModel::paas_pair(const ImageBuffer& z, double sigma, const Condition& cond, int n_samples,
                                      std::uint64_t seed) const {
  if (n_samples < 1) throw InvalidArgument("paas: n_samples must be >= 1");
  check_inputs(z, sigma);
  const auto cond_comps = components(resolve(cond));
  const auto marg_comps = marginal_components();
  const CounterRng rng(seed, streams::kPaas);
  PaasEstimate out{ImageBuffer(z.height(), z.width(), ImageKind::gradient),
                   ImageBuffer(z.height(), z.width(), ImageKind::gradient)};
  ImageBuffer noisy(z.height(), z.width(), ImageKind::radiance);
  for (int k = 0; k < n_samples; ++k) {
    const std::uint64_t base = static_cast<std::uint64_t>(k) * z.size();
    for (std::size_t i = 0; i < z.size(); ++i) noisy[i] = z[i] + sigma * rng.normal(base + i);
    const ImageBuffer dc = posterior_mean(cond_comps, noisy, sigma);
    const ImageBuffer du = posterior_mean(marg_comps, noisy, sigma);
    for (std::size_t i = 0; i < z.size(); ++i) {
      out.conditional[i] += dc[i] - z[i];
      out.unconditional[i] += du[i] - z[i];
    }
  }
  const double scale = 1.0 / (static_cast<double>(n_samples) * sigma * sigma);
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.conditional[i] *= scale;
    out.unconditional[i] *= scale;
  }
  return out;
}

GradientDecomposition ToyScoreModel::decompose_gradient(const ImageBuffer& z, double sigma,
                                                        const Condition& cond) const {
  check_inputs(z, sigma);
  const ConditionIndex target = resolve(cond);
  const std::size_t nb = templates_.bins().size();
  const std::size_t nk = templates_.keys().size();

  // Per-condition scores and log-likelihoods; the prior over conditions is uniform.
  std::vector<ImageBuffer> scores;
  std::vector<double> log_post;
  scores.reserve(nb * nk);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t k = 0; k < nk; ++k) {
      const auto comps = components({b, k});
      scores.push_back(mixture_score(comps, z, sigma));
      log_post.push_back(mixture_log_density(comps, z, sigma));
    }
  }
  softmax_inplace(log_post);
  const std::vector<double>& post = log_post;

  auto weighted = [&](auto&& include) {
    ImageBuffer acc(z.height(), z.width(), ImageKind::gradient);
    double mass = 0.0;
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t k = 0; k < nk; ++k) {
        if (!include(b, k)) continue;
        const double w = post[b * nk + k];
        mass += w;
        const ImageBuffer& s = scores[b * nk + k];
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * s[i];
      }
    }
    if (mass > 0.0)
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= mass;
    return acc;
  };

  GradientDecomposition out;
  out.uncond = weighted([](std::size_t, std::size_t) { return true; });
  const ImageBuffer pose_mean = weighted([&](std::size_t b, std::size_t) { return b == target.bin; });
  const ImageBuffer prompt_mean = weighted([&](std::size_t, std::size_t k) { return k == target.key; });
  const ImageBuffer& own = scores[target.bin * nk + target.key];

  out.pose_grad = ImageBuffer(z.height(), z.width(), ImageKind::gradient);
  out.prompt_grad = out.pose_grad;
  out.pcmi_grad = out.pose_grad;
  out.pose_prompt_grad = out.pose_grad;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out.pose_prompt_grad[i] = own[i] - out.uncond[i];
    out.pose_grad[i] = pose_mean[i] - out.uncond[i];
    out.prompt_grad[i] = prompt_mean[i] - out.uncond[i];
    out.pcmi_grad[i] = out.pose_prompt_grad[i] - out.pose_grad[i] - out.prompt_grad[i];
  }
  return out;
}

}  // namespace januslab
