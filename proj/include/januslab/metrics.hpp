#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "januslab/image.hpp"
#include "januslab/prompt.hpp"
#include "januslab/renderer.hpp"
#include "januslab/scoremodel.hpp"

namespace januslab {

using DistanceFn = std::function<double(const ImageBuffer&, const ImageBuffer&)>;

// Mean absolute difference at full, half and quarter resolution (2x2 box
// pooling between levels), averaged with equal weights.
double pyramid_mad(const ImageBuffer& a, const ImageBuffer& b);
double mean_abs(const ImageBuffer& a, const ImageBuffer& b);

// Name-based registry; "pyramid_mad" and "mean_abs" are always present.
void register_distance(const std::string& name, DistanceFn fn);
DistanceFn distance_by_name(const std::string& name);  // LookupError
std::vector<std::string> distance_names();

// Mean of d(img_k, img_{k+1 mod n}) over the cyclic sequence.
double adjacent_consistency(std::span<const ImageBuffer> images, const DistanceFn& d);

// Normalized cross-correlation over the patch with per-channel means
// removed. Zero when either side is constant on the patch.
double patch_ncc(const ImageBuffer& a, const ImageBuffer& b, const PatchRect& patch);

struct JanusResult {
  int bin_count = 0;
  bool success = false;
  std::vector<std::string> bins_with_face;
  std::vector<double> best_ncc;  // per ViewBinConfig::names() entry; -1 for bins with no image
};

// Assigns each image to a view bin by (azimuth, elevation); a bin shows a
// face when its best patch correlation with the canonical template exceeds
// the threshold. Success iff the canonical bin is the only bin with a face.
JanusResult janus_score(std::span<const ImageBuffer> images, std::span<const double> azimuths, double elevation,
                        const ImageBuffer& canonical, const PatchRect& patch, const ViewBinConfig& bins,
                        const std::string& canonical_bin, double match_threshold = 0.6);

struct AlignmentCurve {
  std::vector<double> azimuth_deg;
  std::vector<std::string> own_bin;
  std::vector<double> own;  // -d(image, pose-true template of its own bin)
  std::vector<std::string> bin_names;
  // per_bin[b][k]: -min over the bin's clean modes of d(image_k, mode)
  std::vector<std::vector<double>> per_bin;

  // Azimuth (degrees) where per_bin[b] peaks; the first on ties.
  double argmax_deg(std::size_t bin) const;
};

AlignmentCurve view_alignment_curve(std::span<const ImageBuffer> images, std::span<const double> azimuths,
                                    double elevation, const TemplateSet& templates, const ViewBinConfig& bins,
                                    const DistanceFn& d);

// Mean d(image, pose-true template) over a turntable.
double template_distance(std::span<const ImageBuffer> images, std::span<const double> azimuths, double elevation,
                         const TemplateSet& templates, const ViewBinConfig& bins, const DistanceFn& d);

struct MetricOptions {
  int n_views = 100;
  double elevation = 15.0 * std::numbers::pi / 180.0;
  Camera camera;              // intrinsics
  RenderConfig render;
  std::string distance = "pyramid_mad";
  double match_threshold = 0.6;
};

struct MetricReport {
  std::string run_id;
  double a_dist = 0.0;
  int janus_bin_count = 0;
  bool janus_success = false;
  double template_distance = 0.0;
  std::vector<std::string> bin_names;
  std::vector<double> alignment_means;  // mean own-curve similarity per bin
  std::vector<double> alignment_peaks;  // argmax_deg per bin
  std::vector<int> peak_inside;         // 1 when the bin's curve peaks inside the bin
};

struct Evaluation {
  MetricReport report;
  AlignmentCurve curve;
  Turntable turntable;
};

Evaluation evaluate_field(const VoxelField& field, const TemplateSet& templates, const ViewBinConfig& bins,
                          const MetricOptions& options, const std::string& run_id);

// Whether `azimuth_deg` falls inside the named azimuth bin.
bool in_bin(double azimuth_deg, const std::string& bin, const ViewBinConfig& bins);

void write_report_csv(std::span<const MetricReport> reports, std::ostream& out);
void write_report_csv(std::span<const MetricReport> reports, const std::filesystem::path& path);
void write_curve_csv(const AlignmentCurve& curve, std::ostream& out);
void write_curve_csv(const AlignmentCurve& curve, const std::filesystem::path& path);
// Polyline plot of the per-bin curves over shaded bin regions.
void write_curve_svg(const AlignmentCurve& curve, const ViewBinConfig& bins, const std::filesystem::path& path);

}  // namespace januslab
