#include "januslab/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace januslab {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

Vec3 direction_from(double azimuth_deg, double elevation_deg) {
  const double az = azimuth_deg * kDeg;
  const double el = elevation_deg * kDeg;
  return {std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az)};
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::acos(std::clamp(dot(a, b), -1.0, 1.0)) / kDeg;
}

}  // namespace

Vec3 scene_color(const SceneSpec& spec, const Vec3& dir) {
  const double azimuth = std::atan2(dir.x, dir.z);
  const double elevation = std::asin(std::clamp(dir.y, -1.0, 1.0)) / kDeg;
  if (spec.with_face) {
    const double eye_radius = spec.eye_radius;
    if (angle_between(dir, direction_from(spec.eye_azimuth, spec.eye_elevation)) < eye_radius ||
        angle_between(dir, direction_from(-spec.eye_azimuth, spec.eye_elevation)) < eye_radius) {
      return spec.eye_color;
    }
    if (std::abs(azimuth / kDeg) < spec.mouth_half_width &&
        std::abs(elevation - spec.mouth_elevation) < spec.mouth_half_height) {
      return spec.mouth_color;
    }
  }
  const double s = spec.hue_swing;
  return spec.body_color + Vec3{s * std::cos(azimuth), s * std::sin(azimuth), -0.6 * s * std::cos(azimuth)};
}

VoxelField build_scene_field(const SceneSpec& spec, int resolution) {
  VoxelField field(resolution);
  const double h = field.cell_size();
  auto density = field.raw_density();
  auto color = field.raw_color();
  for (int z = 0; z < resolution; ++z) {
    for (int y = 0; y < resolution; ++y) {
      for (int x = 0; x < resolution; ++x) {
        const std::size_t i = field.cell_index(x, y, z);
        const Vec3 p = field.cell_center(x, y, z);
        const double r = norm(p);
        // One-cell soft shell keeps the silhouette smooth under interpolation.
        const double inside = std::clamp((spec.body_radius - r) / h + 0.5, 0.0, 1.0);
        const double d = std::max(spec.density * inside, 1e-4);
        density[i] = static_cast<float>(softplus_inverse(d));
        const Vec3 c = r > 1e-9 ? scene_color(spec, p * (1.0 / r)) : spec.body_color;
        for (int ch = 0; ch < 3; ++ch) color[3 * i + ch] = static_cast<float>(logit(std::clamp(c[ch], 0.02, 0.98)));
      }
    }
  }
  return field;
}

}  // namespace januslab
