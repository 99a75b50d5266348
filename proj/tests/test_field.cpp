#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "januslab/errors.hpp"
#include "januslab/field.hpp"
#include "support.hpp"

using namespace januslab;

namespace {

// Scalar reference interpolator written from the definition.
FieldSample reference_sample(const VoxelField& f, const Vec3& p) {
  if (!f.bbox().contains(p)) return {};
  const int n = f.resolution();
  const double h = f.cell_size();
  auto axis = [&](double v, double lo, int& i0, int& i1, double& t) {
    double u = (v - lo) / h - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(n - 1));
    i0 = std::min(static_cast<int>(std::floor(u)), n - 2);
    i1 = i0 + 1;
    t = u - i0;
  };
  int x0, x1, y0, y1, z0, z1;
  double tx, ty, tz;
  axis(p.x, f.bbox().lo.x, x0, x1, tx);
  axis(p.y, f.bbox().lo.y, y0, y1, ty);
  axis(p.z, f.bbox().lo.z, z0, z1, tz);
  FieldSample s;
  for (int c = 0; c < 8; ++c) {
    const int x = (c & 1) ? x1 : x0;
    const int y = (c & 2) ? y1 : y0;
    const int z = (c & 4) ? z1 : z0;
    const double w = ((c & 1) ? tx : 1 - tx) * ((c & 2) ? ty : 1 - ty) * ((c & 4) ? tz : 1 - tz);
    const std::size_t i = f.cell_index(x, y, z);
    s.density += w * softplus(f.raw_density()[i]);
    s.color.x += w * sigmoid(f.raw_color()[3 * i]);
    s.color.y += w * sigmoid(f.raw_color()[3 * i + 1]);
    s.color.z += w * sigmoid(f.raw_color()[3 * i + 2]);
  }
  return s;
}

std::filesystem::path temp_path(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "januslab_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("new_field constant init") {
  const VoxelField f = new_field(8, InitMode::constant, 0);
  for (std::size_t i = 0; i < f.cell_count(); ++i) {
    CHECK(softplus(f.raw_density()[i]) == doctest::Approx(0.01).epsilon(1e-6));
  }
  for (double c : f.raw_color()) CHECK(sigmoid(c) == doctest::Approx(0.5));
}

TEST_CASE("new_field seeded noise is deterministic and bounded") {
  const VoxelField a = new_field(8, InitMode::seeded_noise, 42);
  const VoxelField b = new_field(8, InitMode::seeded_noise, 42);
  const VoxelField c = new_field(8, InitMode::seeded_noise, 43);
  const VoxelField base = new_field(8, InitMode::constant, 0);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  for (std::size_t i = 0; i < a.cell_count(); ++i) {
    CHECK(std::abs(a.raw_density()[i] - base.raw_density()[i]) <= 0.1 + 1e-6);
  }
}

TEST_CASE("new_field rejects resolution below 2") {
  CHECK_THROWS_AS(new_field(1, InitMode::constant, 0), InvalidArgument);
}

TEST_CASE("sample_field at nodes, outside and midpoints") {
  jltest::Gen gen(7);
  VoxelField f = gen.field(6);
  SUBCASE("exact at cell centers") {
    for (int k = 0; k < 20; ++k) {
      const int x = gen.integer(0, 5), y = gen.integer(0, 5), z = gen.integer(0, 5);
      const auto s = sample_field(f, f.cell_center(x, y, z));
      const std::size_t i = f.cell_index(x, y, z);
      CHECK(s.density == doctest::Approx(softplus(f.raw_density()[i])).epsilon(1e-12));
      CHECK(s.color.y == doctest::Approx(sigmoid(f.raw_color()[3 * i + 1])).epsilon(1e-12));
    }
  }
  SUBCASE("outside the bbox") {
    const auto s = sample_field(f, {1.5, 0.0, 0.0});
    CHECK(s.density == 0.0);
    CHECK(s.color.x == 0.0);
    CHECK(s.color.y == 0.0);
    CHECK(s.color.z == 0.0);
  }
  SUBCASE("midpoint averages activated density") {
    const Vec3 a = f.cell_center(2, 3, 1);
    const Vec3 b = f.cell_center(3, 3, 1);
    const auto s = sample_field(f, {(a.x + b.x) / 2, a.y, a.z});
    const double da = softplus(f.raw_density()[f.cell_index(2, 3, 1)]);
    const double db = softplus(f.raw_density()[f.cell_index(3, 3, 1)]);
    CHECK(s.density == doctest::Approx((da + db) / 2).epsilon(1e-12));
  }
  SUBCASE("non-finite point") {
    CHECK_THROWS_AS(sample_field(f, {NAN, 0.0, 0.0}), InvalidArgument);
  }
}

TEST_CASE("property: sample_field matches the scalar reference at 100 random points") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    jltest::Gen gen(seed);
    const VoxelField f = gen.field(gen.integer(2, 9));
    for (int k = 0; k < 100; ++k) {
      const Vec3 p{gen.uniform(-1.1, 1.1), gen.uniform(-1.1, 1.1), gen.uniform(-1.1, 1.1)};
      const auto s = sample_field(f, p);
      const auto r = reference_sample(f, p);
      CHECK(s.density == doctest::Approx(r.density).epsilon(1e-12));
      CHECK(s.color.x == doctest::Approx(r.color.x).epsilon(1e-12));
      CHECK(s.color.z == doctest::Approx(r.color.z).epsilon(1e-12));
      CHECK(s.density >= 0.0);
      CHECK(s.color.x >= 0.0);
      CHECK(s.color.x <= 1.0);
    }
  }
}

TEST_CASE("property: activated values stay in range for extreme raw values") {
  jltest::Gen gen(11);
  VoxelField f(4);
  for (auto& d : f.raw_density()) d = gen.uniform(-800.0, 800.0);
  for (auto& c : f.raw_color()) c = gen.uniform(-800.0, 800.0);
  for (int k = 0; k < 200; ++k) {
    const auto s = sample_field(f, {gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1)});
    CHECK(std::isfinite(s.density));
    CHECK(s.density >= 0.0);
    CHECK(s.color.x >= 0.0);
    CHECK(s.color.x <= 1.0);
  }
}

TEST_CASE("apply_update") {
  jltest::Gen gen(3);
  VoxelField f = new_field(4, InitMode::seeded_noise, 1);
  FieldGradient g(f.cell_count());
  for (auto& v : g.d_raw_density) v = gen.normal();
  for (auto& v : g.d_raw_color) v = gen.normal();

  SUBCASE("lr = 0 leaves parameters bitwise unchanged") {
    OptimizerState opt(f, {0.0, 0.9, 0.99, 1e-8});
    VoxelField before = f;
    apply_update(f, g, opt);
    CHECK(f == before);
    CHECK(opt.step == 1);
  }
  SUBCASE("zero gradient leaves parameters unchanged") {
    OptimizerState opt(f, {});
    VoxelField before = f;
    apply_update(f, FieldGradient(f.cell_count()), opt);
    CHECK(f == before);
  }
  SUBCASE("moves along +grad") {
    OptimizerState opt(f, {});
    VoxelField before = f;
    apply_update(f, g, opt);
    for (std::size_t i = 0; i < f.cell_count(); ++i) {
      const double delta = f.raw_density()[i] - before.raw_density()[i];
      if (g.d_raw_density[i] != 0.0) CHECK(delta * g.d_raw_density[i] > 0.0);
    }
  }
  SUBCASE("deterministic") {
    VoxelField f2 = f;
    OptimizerState o1(f, {}), o2(f, {});
    for (int k = 0; k < 3; ++k) {
      apply_update(f, g, o1);
      apply_update(f2, g, o2);
    }
    CHECK(f == f2);
    CHECK(o1.step == 3);
  }
  SUBCASE("shape mismatch and non-finite gradients are rejected") {
    OptimizerState opt(f, {});
    VoxelField before = f;
    CHECK_THROWS_AS(apply_update(f, FieldGradient(3), opt), InvalidArgument);
    g.d_raw_color[5] = NAN;
    CHECK_THROWS_AS(apply_update(f, g, opt), NonFiniteError);
    CHECK(f == before);
    CHECK(opt.step == 0);
  }
}

TEST_CASE("save/load round trip is bitwise") {
  VoxelField f = new_field(5, InitMode::seeded_noise, 9);
  OptimizerState opt(f, {});
  jltest::Gen gen(2);
  FieldGradient g(f.cell_count());
  for (auto& v : g.d_raw_density) v = gen.normal();
  apply_update(f, g, opt);
  const auto path = temp_path("roundtrip.jlab");
  save_field(f, path);
  CHECK(load_field(path) == f);
}

TEST_CASE("load errors are distinct") {
  const VoxelField f = new_field(3, InitMode::constant, 0);
  auto bytes = encode_field(f);
  SUBCASE("wrong magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_field(bytes), FormatError);
  }
  SUBCASE("truncated payload") {
    bytes.resize(bytes.size() - 4);
    CHECK_THROWS_AS(decode_field(bytes), TruncationError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_field(temp_path("does_not_exist.jlab")), IoError);
  }
}

TEST_CASE("file header layout") {
  const VoxelField f = new_field(3, InitMode::constant, 0);
  const auto bytes = encode_field(f);
  REQUIRE(bytes.size() == 4 + 2 + 4 + 48 + 4 * 27 * 4);
  CHECK(bytes[0] == 'J');
  CHECK(bytes[3] == 'B');
  CHECK(bytes[6] == 3);  // resolution, little-endian
  CHECK(bytes[7] == 0);
}
