#include "januslab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

#include "januslab/distill.hpp"
#include "januslab/errors.hpp"
#include "januslab/parallel.hpp"

namespace januslab {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

ImageBuffer pool2(const ImageBuffer& img) {
  const int h = std::max(1, img.height() / 2);
  const int w = std::max(1, img.width() / 2);
  ImageBuffer out(h, w, img.kind());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int y1 = std::min(2 * y + 1, img.height() - 1);
      const int x1 = std::min(2 * x + 1, img.width() - 1);
      for (int c = 0; c < 3; ++c)
        out.at(y, x, c) = 0.25 * (img.at(2 * y, 2 * x, c) + img.at(2 * y, x1, c) + img.at(y1, 2 * x, c) + img.at(y1, x1, c));
    }
  }
  return out;
}

double mad(const ImageBuffer& a, const ImageBuffer& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return a.size() == 0 ? 0.0 : s / static_cast<double>(a.size());
}

struct Registry {
  std::mutex mutex;
  std::map<std::string, DistanceFn> fns{{"pyramid_mad", pyramid_mad}, {"mean_abs", mean_abs}};
};

Registry& registry() {
  static Registry r;
  return r;
}

double wrap_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

void check_turntable(std::span<const ImageBuffer> images, std::span<const double> azimuths) {
  if (images.size() != azimuths.size()) throw InvalidArgument("one azimuth per image is required");
  for (const auto& img : images) require_same_shape(images.front(), img, "turntable");
}

// Distance from every image to every clean mode of every bin, in parallel
// over images.
std::vector<std::vector<double>> nearest_mode_distances(std::span<const ImageBuffer> images,
                                                        const TemplateSet& templates, const DistanceFn& d) {
  const std::size_t nb = templates.bins().size();
  const std::size_t clean = templates.key_index(kCleanKey);
  std::vector<std::vector<double>> out(nb, std::vector<double>(images.size(), 0.0));
  parallel_chunks(images.size(), [&](std::size_t k) {
    for (std::size_t b = 0; b < nb; ++b) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& mode : templates.modes(b, clean)) best = std::min(best, d(images[k], mode));
      out[b][k] = best;
    }
  });
  return out;
}

}  // namespace

double mean_abs(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "mean_abs");
  return mad(a, b);
}

double pyramid_mad(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "pyramid_mad");
  double total = mad(a, b);
  ImageBuffer pa = pool2(a);
  ImageBuffer pb = pool2(b);
  total += mad(pa, pb);
  total += mad(pool2(pa), pool2(pb));
  return total / 3.0;
}

void register_distance(const std::string& name, DistanceFn fn) {
  if (name.empty() || !fn) throw InvalidArgument("register_distance: empty name or function");
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.fns[name] = std::move(fn);
}

DistanceFn distance_by_name(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  auto it = r.fns.find(name);
  if (it == r.fns.end()) throw LookupError("unknown distance '" + name + "'");
  return it->second;
}

std::vector<std::string> distance_names() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> names;
  for (const auto& [name, fn] : r.fns) names.push_back(name);
  return names;
}

double adjacent_consistency(std::span<const ImageBuffer> images, const DistanceFn& d) {
  if (images.size() < 2) throw InvalidArgument("adjacent_consistency: need at least 2 images");
  for (const auto& img : images) require_same_shape(images.front(), img, "adjacent_consistency");
  std::vector<double> dist(images.size());
  parallel_chunks(images.size(), [&](std::size_t k) { dist[k] = d(images[k], images[(k + 1) % images.size()]); });
  double sum = 0.0;
  for (double v : dist) sum += v;
  return sum / static_cast<double>(images.size());
}

double patch_ncc(const ImageBuffer& a, const ImageBuffer& b, const PatchRect& patch) {
  require_same_shape(a, b, "patch_ncc");
  if (patch.y0 < 0 || patch.x0 < 0 || patch.y1 > a.height() || patch.x1 > a.width() || patch.area() <= 0)
    throw InvalidArgument("patch_ncc: patch outside the image");
  // Means are taken per channel so a uniform tint does not correlate.
  const double n = patch.area();
  double ma[3] = {0.0, 0.0, 0.0}, mb[3] = {0.0, 0.0, 0.0};
  for (int y = patch.y0; y < patch.y1; ++y)
    for (int x = patch.x0; x < patch.x1; ++x)
      for (int c = 0; c < 3; ++c) {
        ma[c] += a.at(y, x, c);
        mb[c] += b.at(y, x, c);
      }
  for (int c = 0; c < 3; ++c) {
    ma[c] /= n;
    mb[c] /= n;
  }
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (int y = patch.y0; y < patch.y1; ++y)
    for (int x = patch.x0; x < patch.x1; ++x)
      for (int c = 0; c < 3; ++c) {
        const double da = a.at(y, x, c) - ma[c];
        const double db = b.at(y, x, c) - mb[c];
        sab += da * db;
        saa += da * da;
        sbb += db * db;
      }
  const double denom = std::sqrt(saa * sbb);
  if (!(denom > 1e-12 * 3.0 * n)) return 0.0;
  return sab / denom;
}

JanusResult janus_score(std::span<const ImageBuffer> images, std::span<const double> azimuths, double elevation,
                        const ImageBuffer& canonical, const PatchRect& patch, const ViewBinConfig& bins,
                        const std::string& canonical_bin, double match_threshold) {
  check_turntable(images, azimuths);
  if (!images.empty()) require_same_shape(images.front(), canonical, "janus_score");
  const std::vector<std::string> names = bins.names();
  JanusResult result;
  result.best_ncc.assign(names.size(), -1.0);
  std::vector<double> ncc(images.size());
  parallel_chunks(images.size(), [&](std::size_t k) { ncc[k] = patch_ncc(images[k], canonical, patch); });
  for (std::size_t k = 0; k < images.size(); ++k) {
    const std::string bin = assign_view_prompt(azimuths[k], elevation, bins);
    const auto b = static_cast<std::size_t>(std::find(names.begin(), names.end(), bin) - names.begin());
    result.best_ncc[b] = std::max(result.best_ncc[b], ncc[k]);
  }
  bool canonical_has_face = false;
  for (std::size_t b = 0; b < names.size(); ++b) {
    if (result.best_ncc[b] > match_threshold) {
      result.bins_with_face.push_back(names[b]);
      if (names[b] == canonical_bin) canonical_has_face = true;
    }
  }
  result.bin_count = static_cast<int>(result.bins_with_face.size());
  result.success = canonical_has_face && result.bin_count == 1;
  return result;
}

double AlignmentCurve::argmax_deg(std::size_t bin) const {
  if (bin >= per_bin.size() || per_bin[bin].empty()) throw InvalidArgument("argmax_deg: no such curve");
  const auto& c = per_bin[bin];
  return azimuth_deg[static_cast<std::size_t>(std::max_element(c.begin(), c.end()) - c.begin())];
}

AlignmentCurve view_alignment_curve(std::span<const ImageBuffer> images, std::span<const double> azimuths,
                                    double elevation, const TemplateSet& templates, const ViewBinConfig& bins,
                                    const DistanceFn& d) {
  check_turntable(images, azimuths);
  for (const auto& name : bins.names())
    if (!templates.has_bin(name)) throw InvalidArgument("view_alignment_curve: no template for '" + name + "'");
  AlignmentCurve curve;
  curve.bin_names = templates.bins();
  const auto dist = nearest_mode_distances(images, templates, d);
  curve.per_bin.resize(dist.size());
  for (std::size_t b = 0; b < dist.size(); ++b)
    for (double v : dist[b]) curve.per_bin[b].push_back(-v);
  curve.own.resize(images.size());
  for (std::size_t k = 0; k < images.size(); ++k) {
    curve.azimuth_deg.push_back(wrap_deg(azimuths[k] * kRadToDeg));
    curve.own_bin.push_back(assign_view_prompt(azimuths[k], elevation, bins));
  }
  parallel_chunks(images.size(), [&](std::size_t k) {
    curve.own[k] = -d(images[k], templates.pose_true(curve.own_bin[k], azimuths[k]));
  });
  return curve;
}

double template_distance(std::span<const ImageBuffer> images, std::span<const double> azimuths, double elevation,
                         const TemplateSet& templates, const ViewBinConfig& bins, const DistanceFn& d) {
  check_turntable(images, azimuths);
  if (images.empty()) throw InvalidArgument("template_distance: no images");
  std::vector<double> dist(images.size());
  parallel_chunks(images.size(), [&](std::size_t k) {
    dist[k] = d(images[k], templates.pose_true(assign_view_prompt(azimuths[k], elevation, bins), azimuths[k]));
  });
  double sum = 0.0;
  for (double v : dist) sum += v;
  return sum / static_cast<double>(images.size());
}

bool in_bin(double azimuth_deg, const std::string& bin, const ViewBinConfig& bins) {
  const ViewBin* vb = bins.find(bin);
  if (vb == nullptr) return false;
  const double a = wrap_deg(azimuth_deg);
  for (const auto& interval : vb->intervals)
    if (interval.contains(a) || interval.contains(a - 360.0) || interval.contains(a + 360.0)) return true;
  return false;
}

Evaluation evaluate_field(const VoxelField& field, const TemplateSet& templates, const ViewBinConfig& bins,
                          const MetricOptions& options, const std::string& run_id) {
  const DistanceFn d = distance_by_name(options.distance);
  Evaluation ev;
  ev.turntable = turntable(field, options.n_views, options.elevation, options.camera, options.render);
  const auto& images = ev.turntable.images;
  const auto& az = ev.turntable.azimuths;

  MetricReport& r = ev.report;
  r.run_id = run_id;
  r.a_dist = adjacent_consistency(images, d);
  const JanusResult janus = janus_score(images, az, options.elevation, templates.canonical(), templates.face_patch(),
                                        bins, templates.canonical_bin(), options.match_threshold);
  r.janus_bin_count = janus.bin_count;
  r.janus_success = janus.success;
  r.template_distance = template_distance(images, az, options.elevation, templates, bins, d);

  ev.curve = view_alignment_curve(images, az, options.elevation, templates, bins, d);
  r.bin_names = ev.curve.bin_names;
  for (std::size_t b = 0; b < r.bin_names.size(); ++b) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < images.size(); ++k) {
      if (ev.curve.own_bin[k] != r.bin_names[b]) continue;
      sum += ev.curve.own[k];
      ++n;
    }
    r.alignment_means.push_back(n == 0 ? 0.0 : sum / n);
    const double peak = ev.curve.argmax_deg(b);
    r.alignment_peaks.push_back(peak);
    r.peak_inside.push_back(in_bin(peak, r.bin_names[b], bins) ? 1 : 0);
  }
  return ev;
}

namespace {

std::string column_name(const std::string& prefix, std::string bin) {
  std::replace(bin.begin(), bin.end(), ' ', '_');
  return prefix + bin;
}

}  // namespace

void write_report_csv(std::span<const MetricReport> reports, std::ostream& out) {
  out << "run_id,a_dist,janus_bin_count,janus_success,template_distance";
  const std::vector<std::string> bins = reports.empty() ? std::vector<std::string>{} : reports.front().bin_names;
  for (const auto& b : bins) out << ',' << column_name("align_", b);
  for (const auto& b : bins) out << ',' << column_name("peak_", b);
  out << '\n';
  for (const auto& r : reports) {
    if (r.bin_names != bins) throw InvalidArgument("write_report_csv: reports disagree on bins");
    out << r.run_id << ',' << format_double(r.a_dist) << ',' << r.janus_bin_count << ','
        << (r.janus_success ? "true" : "false") << ',' << format_double(r.template_distance);
    for (double v : r.alignment_means) out << ',' << format_double(v);
    for (double v : r.alignment_peaks) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_report_csv(std::span<const MetricReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_report_csv(reports, out);
}

void write_curve_csv(const AlignmentCurve& curve, std::ostream& out) {
  out << "azimuth_deg,bin,similarity";
  for (const auto& b : curve.bin_names) out << ',' << column_name("sim_", b);
  out << '\n';
  for (std::size_t k = 0; k < curve.azimuth_deg.size(); ++k) {
    out << format_double(curve.azimuth_deg[k]) << ',' << curve.own_bin[k] << ',' << format_double(curve.own[k]);
    for (const auto& c : curve.per_bin) out << ',' << format_double(c[k]);
    out << '\n';
  }
}

void write_curve_csv(const AlignmentCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_curve_csv(curve, out);
}

void write_curve_svg(const AlignmentCurve& curve, const ViewBinConfig& bins, const std::filesystem::path& path) {
  constexpr double kW = 720, kH = 320, kPad = 40;
  static const char* kColors[] = {"#c0392b", "#2874a6", "#239b56", "#7d3c98", "#b9770e", "#566573"};
  double lo = 0.0, hi = -1e300;
  for (const auto& c : curve.per_bin)
    for (double v : c) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(hi > lo)) hi = lo + 1.0;
  auto px = [&](double az) { return kPad + (kW - 2 * kPad) * az / 360.0; };
  auto py = [&](double v) { return kH - kPad - (kH - 2 * kPad) * (v - lo) / (hi - lo); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t b = 0; b < bins.bins.size(); ++b) {
    for (const auto& interval : bins.bins[b].intervals) {
      const double a0 = interval.lo_deg < 0 ? interval.lo_deg + 360.0 : interval.lo_deg;
      const double a1 = interval.hi_deg < 0 ? interval.hi_deg + 360.0 : interval.hi_deg;
      auto shade = [&](double from, double to) {
        svg << "<rect x=\"" << px(from) << "\" y=\"" << kPad << "\" width=\"" << px(to) - px(from)
            << "\" height=\"" << kH - 2 * kPad << "\" fill=\"" << kColors[b % 6] << "\" fill-opacity=\"0.08\"/>\n";
      };
      if (a0 <= a1) {
        shade(a0, std::min(a1, 360.0));
        if (a1 > 360.0) shade(0.0, a1 - 360.0);
      } else {
        shade(a0, 360.0);
        shade(0.0, a1);
      }
    }
  }
  for (std::size_t b = 0; b < curve.per_bin.size(); ++b) {
    svg << "<polyline fill=\"none\" stroke=\"" << kColors[b % 6] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < curve.azimuth_deg.size(); ++k)
      svg << px(curve.azimuth_deg[k]) << ',' << py(curve.per_bin[b][k]) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << kPad + 130 * b << "\" y=\"20\" font-size=\"12\" fill=\"" << kColors[b % 6] << "\">"
        << curve.bin_names[b] << "</text>\n";
  }
  svg << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad << "\" y2=\"" << kH - kPad
      << "\" stroke=\"black\"/>\n";
  for (int a = 0; a <= 360; a += 90)
    svg << "<text x=\"" << px(a) - 8 << "\" y=\"" << kH - kPad + 16 << "\" font-size=\"11\">" << a << "</text>\n";
  svg << "</svg>\n";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << svg.str();
}

}  // namespace januslab
