#pragma once

#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "januslab/field.hpp"
#include "januslab/image.hpp"
#include "januslab/prompt.hpp"
#include "januslab/renderer.hpp"
#include "januslab/scene.hpp"

namespace januslab {

inline constexpr std::string_view kCleanKey = "clean";

// A word in the user prompt that drags non-canonical views toward the
// canonical face: when present, the canonical face patch is alpha-blended
// with weight `blend` into every non-canonical template.
struct WordBias {
  std::string word;
  double blend = 0.0;
};

struct BiasConfig {
  double beta = 0.0;  // canonical-view weight inside every conditional
  std::string canonical_bin{kFrontView};
  std::vector<WordBias> word_bias;

  void validate() const;
};

// Half-open pixel rectangle [y0, y1) x [x0, x1).
struct PatchRect {
  int y0 = 0;
  int x0 = 0;
  int y1 = 0;
  int x1 = 0;

  bool contains(int y, int x) const noexcept { return y >= y0 && y < y1 && x >= x0 && x < x1; }
  int area() const noexcept { return (y1 - y0) * (x1 - x0); }
};

/// Template images M(v, w): for every view bin v and word-set key w, one or
/// more mode images (renders of the hidden reference at azimuths inside the
/// bin). The data distribution of each condition is a Dirac mixture on its
/// modes. Immutable once built.
class TemplateSet {
 public:
  TemplateSet(std::vector<std::string> bins, std::vector<std::string> keys, std::string canonical_bin,
              PatchRect face_patch);

  // Convenience for tests: one bin, one clean key, one mode.
  static TemplateSet single(const ImageBuffer& image, std::string bin = std::string(kFrontView));

  void set_modes(std::string_view bin, std::string_view key, std::vector<ImageBuffer> images,
                 std::vector<double> azimuths);

  const std::vector<std::string>& bins() const noexcept { return bins_; }
  const std::vector<std::string>& keys() const noexcept { return keys_; }
  const std::string& canonical_bin() const noexcept { return canonical_bin_; }
  const PatchRect& face_patch() const noexcept { return face_patch_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  std::size_t bin_index(std::string_view bin) const;  // InvalidArgument if unknown
  std::size_t key_index(std::string_view key) const;
  bool has_bin(std::string_view bin) const noexcept;

  const std::vector<ImageBuffer>& modes(std::size_t bin, std::size_t key) const;
  const std::vector<ImageBuffer>& modes(std::string_view bin, std::string_view key) const;
  const std::vector<double>& mode_azimuths(std::size_t bin) const;

  // The clean mode of `bin` closest in azimuth to `azimuth` (radians).
  const ImageBuffer& pose_true(std::string_view bin, double azimuth) const;
  // First clean mode of the canonical bin.
  const ImageBuffer& canonical() const;

  // Key for the biased words present in the prompt, in word-bias order
  // joined by '+', or "clean".
  std::string key_for(const Prompt& prompt, const BiasConfig& bias) const;

  // Throws unless every (bin, key) has modes of one common shape in [0, 1].
  void validate() const;

  // Writes `<bin>_<key>.ppm` (a strip of the bin's modes) per pair; spaces
  // in names become '-'.
  void export_ppm(const std::filesystem::path& dir) const;

 private:
  std::vector<std::string> bins_;
  std::vector<std::string> keys_;
  std::string canonical_bin_;
  PatchRect face_patch_;
  int height_ = 0;
  int width_ = 0;
  std::vector<std::vector<std::vector<ImageBuffer>>> modes_;  // [bin][key][mode]
  std::vector<std::vector<double>> azimuths_;                  // [bin][mode]
};

struct ReferenceOptions {
  int resolution = 32;
  Camera camera;                      // intrinsics; azimuth/elevation ignored
  double template_elevation = 15.0 * std::numbers::pi / 180.0;
  double top_elevation = 75.0 * std::numbers::pi / 180.0;  // used for the top bin
  double template_spacing_deg = 45.0;  // maximum azimuth gap between modes of a bin
  RenderConfig render;
};

struct Reference {
  VoxelField field;
  TemplateSet templates;
};

// Builds the hidden reference field and renders its templates. Each azimuth
// interval of each bin is split into pieces no wider than
// template_spacing_deg with one mode at each piece's center; the top bin
// gets one mode at top_elevation. Word-bias variants are produced for every
// non-empty subset of the bias words.
Reference build_reference(const SceneSpec& scene, const ReferenceOptions& options, const ViewBinConfig& bins,
                          const BiasConfig& bias);

struct Condition {
  std::string view_bin;
  Prompt prompt;
};

struct GuidanceConfig {
  double scale = 1.0;
};

struct GradientDecomposition {
  ImageBuffer uncond;            // grad log p(z)
  ImageBuffer pose_grad;         // grad log p(view | z)
  ImageBuffer prompt_grad;       // grad log p(prompt | z)
  ImageBuffer pcmi_grad;         // grad log C
  ImageBuffer pose_prompt_grad;  // grad log p(view, prompt | z)
};

// PAAS estimates sharing one set of noise draws.
struct PaasEstimate {
  ImageBuffer conditional;
  ImageBuffer unconditional;
};

/// Analytic stand-in for a pose/prompt-conditioned image diffusion model.
/// Each condition c = (view bin, word key) has data distribution
///   (1 - beta) * Dirac mixture on M(c) + beta * Dirac mixture on M(canonical, key);
/// p(z; sigma) is its Gaussian smoothing. The unconditional distribution
/// mixes all conditions uniformly. Every score, denoiser and posterior is
/// exact; responsibilities are computed in log space.
class ToyScoreModel {
 public:
  ToyScoreModel(TemplateSet templates, BiasConfig bias);

  const TemplateSet& templates() const noexcept { return templates_; }
  const BiasConfig& bias() const noexcept { return bias_; }
  std::size_t condition_count() const noexcept { return templates_.bins().size() * templates_.keys().size(); }

  ImageBuffer conditional_score(const ImageBuffer& z, double sigma, const Condition& cond) const;
  ImageBuffer unconditional_score(const ImageBuffer& z, double sigma) const;
  // cond + s * (cond - uncond)
  ImageBuffer cfg_score(const ImageBuffer& z, double sigma, const Condition& cond, const GuidanceConfig& guidance) const;
  // Posterior mean E[x0 | z] under the conditional.
  ImageBuffer denoise(const ImageBuffer& z, double sigma, const Condition& cond) const;
  ImageBuffer denoise_unconditional(const ImageBuffer& z, double sigma) const;

  double log_density(const ImageBuffer& z, double sigma, const Condition& cond) const;
  double log_marginal(const ImageBuffer& z, double sigma) const;

  // Monte-Carlo mean of (D(z + sigma n; sigma) - z) / sigma^2, n ~ N(0, I),
  // with draws from a counter-based generator keyed by seed.
  ImageBuffer paas_estimate(const ImageBuffer& z, double sigma, const Condition& cond, int n_samples,
                            std::uint64_t seed) const;
  PaasEstimate paas_pair(const ImageBuffer& z, double sigma, const Condition& cond, int n_samples,
                         std::uint64_t seed) const;

  GradientDecomposition decompose_gradient(const ImageBuffer& z, double sigma, const Condition& cond) const;

 private:
  struct Component {
    const ImageBuffer* mean;
    double log_weight;
  };
  struct ConditionIndex {
    std::size_t bin;
    std::size_t key;
  };

  ConditionIndex resolve(const Condition& cond) const;
  std::vector<Component> components(ConditionIndex c) const;
  std::vector<Component> marginal_components() const;
  void check_inputs(const ImageBuffer& z, double sigma) const;

  TemplateSet templates_;
  BiasConfig bias_;
  std::size_t canonical_bin_;
};

}  // namespace januslab
