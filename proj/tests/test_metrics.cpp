#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "januslab/errors.hpp"
#include "januslab/metrics.hpp"
#include "support.hpp"

using namespace januslab;

namespace {

constexpr double kDeg = M_PI / 180.0;

std::vector<double> even_azimuths(int n) {
  std::vector<double> az(n);
  for (int k = 0; k < n; ++k) az[k] = 2 * M_PI * k / n;
  return az;
}

// Shared 24x24 reference for the detector tests.
const Reference& reference() {
  static const Reference ref = [] {
    ReferenceOptions ro;
    ro.camera.height = ro.camera.width = 32;
    BiasConfig bias;
    bias.beta = 0.6;
    bias.word_bias = {{"smiling", 0.8}};
    return build_reference(SceneSpec{}, ro, ViewBinConfig::standard(), bias);
  }();
  return ref;
}

}  // namespace

TEST_CASE("pyramid_mad") {
  jltest::Gen gen(1);
  const ImageBuffer a = gen.image(16, 16);
  CHECK(pyramid_mad(a, a) == 0.0);
  const ImageBuffer zeros(16, 16, ImageKind::radiance, 0.0);
  const ImageBuffer ones(16, 16, ImageKind::radiance, 1.0);
  CHECK(pyramid_mad(zeros, ones) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(pyramid_mad(a, ImageBuffer(8, 16)), InvalidArgument);
}

TEST_CASE("property: pyramid_mad symmetry, positivity and a loose triangle inequality") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    jltest::Gen gen(seed);
    const int h = gen.integer(4, 20), w = gen.integer(4, 20);
    const ImageBuffer a = gen.image(h, w), b = gen.image(h, w), c = gen.image(h, w);
    CHECK(pyramid_mad(a, b) == pyramid_mad(b, a));
    CHECK(pyramid_mad(a, b) > 0.0);
    CHECK(pyramid_mad(a, c) <= 2.0 * (pyramid_mad(a, b) + pyramid_mad(b, c)));
    ImageBuffer a2 = a;
    a2[gen.integer(0, static_cast<int>(a2.size()) - 1)] += 0.01;
    CHECK(pyramid_mad(a, a2) > 0.0);
  }
}

TEST_CASE("distance registry") {
  CHECK(distance_by_name("pyramid_mad")(ImageBuffer(4, 4), ImageBuffer(4, 4)) == 0.0);
  CHECK_THROWS_AS(distance_by_name("lpips"), LookupError);
  register_distance("max_abs", [](const ImageBuffer& a, const ImageBuffer& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
  });
  CHECK(distance_by_name("max_abs")(ImageBuffer(2, 2, ImageKind::radiance, 0.0), ImageBuffer(2, 2, ImageKind::radiance, 0.3)) ==
        doctest::Approx(0.3));
}

TEST_CASE("adjacent_consistency") {
  jltest::Gen gen(2);
  const ImageBuffer a = gen.image(8, 8);
  SUBCASE("identical images") {
    std::vector<ImageBuffer> imgs(5, a);
    CHECK(adjacent_consistency(imgs, pyramid_mad) == 0.0);
  }
  SUBCASE("alternating pair") {
    const ImageBuffer b(8, 8, ImageKind::radiance, 0.4);
    const ImageBuffer z(8, 8, ImageKind::radiance, 0.0);
    std::vector<ImageBuffer> imgs{z, b, z, b, z, b};
    CHECK(adjacent_consistency(imgs, pyramid_mad) == doctest::Approx(0.4));
  }
  SUBCASE("fewer than two images") {
    std::vector<ImageBuffer> one{a};
    CHECK_THROWS_AS(adjacent_consistency(one, pyramid_mad), InvalidArgument);
  }
  SUBCASE("property: cyclic rotation invariance") {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<ImageBuffer> imgs;
      const int n = gen.integer(2, 9);
      for (int k = 0; k < n; ++k) imgs.push_back(gen.image(6, 6));
      const double base = adjacent_consistency(imgs, pyramid_mad);
      std::rotate(imgs.begin(), imgs.begin() + gen.integer(0, n - 1), imgs.end());
      CHECK(adjacent_consistency(imgs, pyramid_mad) == doctest::Approx(base).epsilon(1e-12));
    }
  }
}

TEST_CASE("janus_score") {
  const Reference& ref = reference();
  const TemplateSet& t = ref.templates;
  const ViewBinConfig bins = ViewBinConfig::standard();
  const auto az = even_azimuths(100);
  const double elev = 15 * kDeg;

  SUBCASE("every image is the canonical template: maximal Janus") {
    std::vector<ImageBuffer> imgs(100, t.canonical());
    const auto r = janus_score(imgs, az, elev, t.canonical(), t.face_patch(), bins, "front view");
    CHECK_FALSE(r.success);
    CHECK(r.bin_count == 3);
  }
  SUBCASE("blank images: no face anywhere") {
    std::vector<ImageBuffer> imgs(100, ImageBuffer(t.height(), t.width(), ImageKind::radiance, 1.0));
    const auto r = janus_score(imgs, az, elev, t.canonical(), t.face_patch(), bins, "front view");
    CHECK_FALSE(r.success);
    CHECK(r.bin_count == 0);
  }
  SUBCASE("reference turntable succeeds") {
    MetricOptions mo;
    const Turntable tt = turntable(ref.field, 100, mo.elevation, mo.camera, mo.render);
    const auto r = janus_score(tt.images, tt.azimuths, tt.elevation, t.canonical(), t.face_patch(), bins, "front view");
    CHECK(r.success);
    CHECK(r.bin_count == 1);
    REQUIRE(r.bins_with_face.size() == 1);
    CHECK(r.bins_with_face[0] == "front view");

    SUBCASE("property: invariant to global brightness in [0.8, 1.2]") {
      jltest::Gen gen(5);
      for (int trial = 0; trial < 6; ++trial) {
        const double k = gen.uniform(0.8, 1.2);
        std::vector<ImageBuffer> scaled = tt.images;
        for (auto& img : scaled)
          for (std::size_t i = 0; i < img.size(); ++i) img[i] *= k;
        const auto s = janus_score(scaled, tt.azimuths, tt.elevation, t.canonical(), t.face_patch(), bins, "front view");
        CHECK(s.success == r.success);
        CHECK(s.bin_count == r.bin_count);
      }
    }
  }
  SUBCASE("shape mismatch") {
    std::vector<ImageBuffer> imgs(2, ImageBuffer(8, 8));
    const std::vector<double> two{0.0, 1.0};
    CHECK_THROWS_AS(janus_score(imgs, two, elev, t.canonical(), t.face_patch(), bins, "front view"), InvalidArgument);
  }
}

TEST_CASE("patch_ncc") {
  jltest::Gen gen(6);
  const ImageBuffer a = gen.image(8, 8);
  const PatchRect p{2, 2, 6, 6};
  CHECK(patch_ncc(a, a, p) == doctest::Approx(1.0));
  ImageBuffer neg = a;
  for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = 1.0 - neg[i];
  CHECK(patch_ncc(a, neg, p) == doctest::Approx(-1.0));
  CHECK(patch_ncc(a, ImageBuffer(8, 8, ImageKind::radiance, 0.5), p) == 0.0);
}

TEST_CASE("view_alignment_curve") {
  const Reference& ref = reference();
  const TemplateSet& t = ref.templates;
  const ViewBinConfig bins = ViewBinConfig::standard();
  const auto az = even_azimuths(72);
  const double elev = 15 * kDeg;

  SUBCASE("pose-true templates give zero distance everywhere") {
    std::vector<ImageBuffer> imgs;
    for (double a : az) imgs.push_back(t.pose_true(assign_view_prompt(a, elev, bins), a));
    const auto c = view_alignment_curve(imgs, az, elev, t, bins, pyramid_mad);
    for (double v : c.own) CHECK(v == 0.0);
  }
  SUBCASE("canonical template everywhere peaks only in the canonical bin") {
    std::vector<ImageBuffer> imgs(az.size(), t.canonical());
    const auto c = view_alignment_curve(imgs, az, elev, t, bins, pyramid_mad);
    double in = -1e9, out = -1e9;
    for (std::size_t k = 0; k < az.size(); ++k) {
      if (c.own_bin[k] == "front view") in = std::max(in, c.own[k]);
      else out = std::max(out, c.own[k]);
    }
    CHECK(in == 0.0);
    CHECK(out < in);
  }
  SUBCASE("reference field: each azimuth bin peaks inside itself") {
    MetricOptions mo;
    mo.n_views = 72;
    const auto ev = evaluate_field(ref.field, t, bins, mo, "ref");
    for (std::size_t b = 0; b < ev.report.bin_names.size(); ++b) {
      if (ev.report.bin_names[b] == "top view") continue;
      CAPTURE(ev.report.bin_names[b]);
      CHECK(ev.report.peak_inside[b] == 1);
    }
  }
}

TEST_CASE("evaluate_field and writers") {
  const Reference& ref = reference();
  MetricOptions mo;
  mo.n_views = 24;
  const auto ev = evaluate_field(ref.field, ref.templates, ViewBinConfig::standard(), mo, "ref");
  CHECK(ev.turntable.images.size() == 24);
  CHECK(ev.report.a_dist > 0.0);
  CHECK(ev.report.janus_success);
  std::ostringstream csv;
  write_report_csv(std::span<const MetricReport>(&ev.report, 1), csv);
  const std::string text = csv.str();
  CHECK(text.rfind("run_id,a_dist,janus_bin_count,janus_success,template_distance,align_front_view", 0) == 0);
  CHECK(text.find("\nref,") != std::string::npos);
  std::ostringstream curve;
  write_curve_csv(ev.curve, curve);
  CHECK(curve.str().rfind("azimuth_deg,bin,similarity,sim_front_view", 0) == 0);
  const auto svg = std::filesystem::temp_directory_path() / "januslab_tests" / "curve.svg";
  std::filesystem::create_directories(svg.parent_path());
  write_curve_svg(ev.curve, ViewBinConfig::standard(), svg);
  std::ifstream in(svg);
  std::string first;
  std::getline(in, first);
  CHECK(first.find("<svg") != std::string::npos);
}

TEST_CASE("a_dist of an all-identical fake turntable is zero") {
  std::vector<ImageBuffer> imgs(100, ImageBuffer(8, 8, ImageKind::radiance, 0.3));
  CHECK(adjacent_consistency(imgs, distance_by_name("pyramid_mad")) == 0.0);
}
