#include <doctest.h>

#include <cmath>
#include <numbers>

#include "januslab/errors.hpp"
#include "januslab/renderer.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace januslab;
using jltest::displaced;
using jltest::flat_grad;

namespace {

constexpr double kPi = std::numbers::pi;

VoxelField uniform_field(int n, double density, Vec3 color_raw = {0.0, 0.0, 0.0}) {
  VoxelField f(n);
  const double raw = density > 0.0 ? softplus_inverse(density) : -800.0;
  for (auto& d : f.raw_density()) d = raw;
  auto c = f.raw_color();
  for (std::size_t i = 0; i < f.cell_count(); ++i) {
    c[3 * i] = color_raw.x;
    c[3 * i + 1] = color_raw.y;
    c[3 * i + 2] = color_raw.z;
  }
  return f;
}

}  // namespace

TEST_CASE("render: empty field shows the background") {
  const VoxelField f = uniform_field(4, 0.0);
  RenderConfig cfg;
  cfg.background = {0.2, 0.4, 0.9};
  const ImageBuffer img = render(f, make_camera(0.7, 0.3, 3.0, 0.8, 8, 8), cfg);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      CHECK(img.at(y, x, 0) == 0.2);
      CHECK(img.at(y, x, 2) == 0.9);
    }
  }
}

TEST_CASE("render: Beer-Lambert through unit density over length 2") {
  const VoxelField f = uniform_field(4, 1.0);
  const Ray ray{{0.0, 0.0, 3.0}, {0.0, 0.0, -1.0}};
  const auto w = compositing_weights(f, ray, RenderConfig{});
  CHECK(w.back() == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
  CHECK(w.back() == doctest::Approx(0.1353).epsilon(1e-3));
}

TEST_CASE("render: opaque red slab saturates the center pixel") {
  VoxelField f(8);
  auto c = f.raw_color();
  for (int z = 0; z < 8; ++z) {
    for (int y = 0; y < 8; ++y) {
      for (int x = 0; x < 8; ++x) {
        const std::size_t i = f.cell_index(x, y, z);
        f.raw_density()[i] = z >= 5 ? 400.0 : -800.0;
        c[3 * i] = 40.0;
        c[3 * i + 1] = -40.0;
        c[3 * i + 2] = -40.0;
      }
    }
  }
  const ImageBuffer img = render(f, make_camera(0.0, 0.0, 3.0, 0.8, 16, 16), RenderConfig{});
  CHECK(img.at(8, 8, 0) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(std::abs(img.at(8, 8, 1)) < 1e-4);
  CHECK(std::abs(img.at(8, 8, 2)) < 1e-4);
}

TEST_CASE("render: compositing weights sum to one and respond monotonically") {
  jltest::Gen gen(5);
  for (int trial = 0; trial < 10; ++trial) {
    VoxelField f = gen.field(6);
    const Camera cam = make_camera(gen.uniform(0, 2 * kPi), gen.uniform(-0.5, 0.5), 3.0, 0.8, 8, 8);
    const Ray ray = camera_ray(cam, gen.integer(0, 7), gen.integer(0, 7));
    const auto w = compositing_weights(f, ray, RenderConfig{});
    double sum = 0.0;
    for (double v : w) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));

    // Raise every cell the ray passes near; background weight must not grow.
    const std::size_t cell = f.cell_index(gen.integer(0, 5), gen.integer(0, 5), gen.integer(0, 5));
    f.raw_density()[cell] += gen.uniform(0.1, 3.0);
    const auto w2 = compositing_weights(f, ray, RenderConfig{});
    CHECK(w2.back() <= w.back() + 1e-15);
  }
}

TEST_CASE("render is deterministic and finite") {
  jltest::Gen gen(8);
  const VoxelField f = gen.field(8);
  const Camera cam = make_camera(1.0, 0.2, 3.0, 0.8, 12, 12);
  const ImageBuffer a = render(f, cam, RenderConfig{});
  const ImageBuffer b = render(f, cam, RenderConfig{});
  CHECK(a == b);
  CHECK(a.all_finite());
  CHECK(render(PreparedField(f), cam, RenderConfig{}) == a);
}

TEST_CASE("render_vjp: zero and scaled cotangents") {
  jltest::Gen gen(12);
  const VoxelField f = gen.field(6);
  const Camera cam = make_camera(2.0, 0.1, 3.0, 0.8, 10, 10);
  const auto zero = render_vjp(f, cam, RenderConfig{}, ImageBuffer(10, 10, ImageKind::gradient));
  for (double v : flat_grad(zero)) CHECK(v == 0.0);

  ImageBuffer g = gen.gradient(10, 10);
  ImageBuffer g2 = g;
  for (std::size_t i = 0; i < g2.size(); ++i) g2[i] *= 2.0;
  const auto a = flat_grad(render_vjp(f, cam, RenderConfig{}, g));
  const auto b = flat_grad(render_vjp(f, cam, RenderConfig{}, g2));
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == doctest::Approx(2.0 * a[i]).epsilon(1e-14));

  CHECK_THROWS_AS(render_vjp(f, cam, RenderConfig{}, ImageBuffer(9, 10, ImageKind::gradient)), InvalidArgument);
}

TEST_CASE("property: render_vjp matches central finite differences on 10 seeds") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    jltest::Gen gen(1000 + seed);
    const VoxelField f = gen.field(8);
    const Camera cam = make_camera(gen.uniform(0, 2 * kPi), gen.uniform(-0.6, 0.6), 3.0, 0.8, 16, 16);
    const RenderConfig cfg;
    const ImageBuffer g = gen.gradient(16, 16);
    std::vector<double> dir(f.cell_count() * 4);
    for (auto& v : dir) v = gen.normal();

    const double analytic = jltest::dot(flat_grad(render_vjp(f, cam, cfg, g)), dir);
    const double h = 1e-4;
    const ImageBuffer plus = render(displaced(f, dir, h), cam, cfg);
    const ImageBuffer minus = render(displaced(f, dir, -h), cam, cfg);
    double fd = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) fd += g[i] * (plus[i] - minus[i]) / (2 * h);
    CAPTURE(seed);
    CHECK(jltest::rel_err(analytic, fd) < 1e-3);
  }
}

TEST_CASE("turntable") {
  const VoxelField f = uniform_field(4, 0.5);
  const Camera base = make_camera(0, 0, 3.0, 0.8, 8, 8);
  SUBCASE("100 views at 3.6 degree spacing") {
    const Turntable tt = turntable(f, 100, 0.2, base, RenderConfig{});
    REQUIRE(tt.images.size() == 100);
    CHECK(tt.azimuths[1] - tt.azimuths[0] == doctest::Approx(3.6 * kPi / 180.0));
    CHECK(tt.azimuths[99] == doctest::Approx(99 * 3.6 * kPi / 180.0));
  }
  SUBCASE("rotationally symmetric field gives equal views 90 degrees apart") {
    jltest::Gen gen(4);
    VoxelField sym(8);
    // Fill one quadrant orbit at a time so the grid is invariant under a quarter turn about y.
    for (int y = 0; y < 8; ++y) {
      for (int z = 0; z < 8; ++z) {
        for (int x = 0; x < 8; ++x) {
          const double d = gen.uniform(-2, 2);
          const double c = gen.uniform(-2, 2);
          int xx = x, zz = z;
          for (int r = 0; r < 4; ++r) {
            const std::size_t i = sym.cell_index(xx, y, zz);
            sym.raw_density()[i] = d;
            for (int k = 0; k < 3; ++k) sym.raw_color()[3 * i + k] = c;
            const int nx = zz, nz = 7 - xx;
            xx = nx;
            zz = nz;
          }
        }
      }
    }
    const Turntable tt = turntable(sym, 4, 0.3, base, RenderConfig{});
    for (std::size_t i = 0; i < tt.images[0].size(); ++i) CHECK(tt.images[0][i] == doctest::Approx(tt.images[1][i]).epsilon(1e-4));
  }
  SUBCASE("needs two views") {
    CHECK_THROWS_AS(turntable(f, 1, 0.0, base, RenderConfig{}), InvalidArgument);
  }
}

TEST_CASE("camera and render config validation") {
  CHECK_THROWS_AS(make_camera(0, 2.0), InvalidArgument);
  CHECK_THROWS_AS(make_camera(0, 0, 3.0, 0.8, 3, 8), InvalidArgument);
  Camera cam = make_camera(-0.5, 0.0);
  CHECK(cam.azimuth >= 0.0);
  CHECK(cam.azimuth < 2 * kPi);
  RenderConfig cfg;
  cfg.samples_per_ray = 4;
  CHECK_THROWS_AS(validate_render_config(cfg, cam, BoundingBox{}), InvalidArgument);
  cfg = RenderConfig{};
  cfg.far = 0.2;
  CHECK_THROWS_AS(validate_render_config(cfg, cam, BoundingBox{}), InvalidArgument);
}
