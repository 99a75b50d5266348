#pragma once

#include "januslab/field.hpp"
#include "januslab/vec3.hpp"

namespace januslab {

// Procedural reference object: a sphere whose body hue drifts with azimuth
// (so every view is distinguishable) and a face on the front hemisphere made
// of two dark eye disks and a mouth band. Angles are in degrees, measured on
// the sphere with azimuth 0 facing +z.
struct SceneSpec {
  double body_radius = 0.7;
  double density = 25.0;
  Vec3 body_color{0.72, 0.58, 0.46};
  double hue_swing = 0.14;

  bool with_face = true;
  Vec3 eye_color{0.06, 0.05, 0.08};
  double eye_azimuth = 22.0;
  double eye_elevation = 14.0;
  double eye_radius = 10.0;
  Vec3 mouth_color{0.55, 0.06, 0.12};
  double mouth_elevation = -12.0;
  double mouth_half_width = 20.0;
  double mouth_half_height = 6.0;
};

// Surface color in the direction of unit vector `dir`.
Vec3 scene_color(const SceneSpec& spec, const Vec3& dir);

VoxelField build_scene_field(const SceneSpec& spec, int resolution);

}  // namespace januslab
