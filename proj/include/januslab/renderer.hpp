#pragma once

#include <vector>

#include "januslab/field.hpp"
#include "januslab/image.hpp"
#include "januslab/vec3.hpp"

namespace januslab {

// Pinhole camera on a sphere around the origin, looking at the origin with
// world-up +y. Azimuth 0 sits on +z; azimuth grows toward +x.
struct Camera {
  double azimuth = 0.0;    // radians, [0, 2pi)
  double elevation = 0.0;  // radians, [-pi/2, pi/2]
  double radius = 3.0;
  double fov_y = 0.8;  // radians
  int height = 32;
  int width = 32;

  Vec3 position() const noexcept;
};

// Wraps azimuth into [0, 2pi) and checks the remaining invariants.
Camera make_camera(double azimuth, double elevation, double radius = 3.0, double fov_y = 0.8,
                   int height = 32, int width = 32);
void validate_camera(const Camera& camera);

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
};
Ray camera_ray(const Camera& camera, int y, int x) noexcept;

struct RenderConfig {
  int samples_per_ray = 64;
  Vec3 background{1.0, 1.0, 1.0};
  double near = 0.5;
  double far = 6.0;
};
void validate_render_config(const RenderConfig& cfg, const Camera& camera, const BoundingBox& bbox);

// Activated copy of a field in the layout the ray marcher reads: density and
// RGB interleaved per cell, plus softplus' for the adjoint. Build once per
// field state when rendering and differentiating the same field.
class PreparedField {
 public:
  explicit PreparedField(const VoxelField& field);

  int resolution() const noexcept { return resolution_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }
  double cell_size() const noexcept { return cell_size_; }
  std::size_t cell_count() const noexcept { return density_slope_.size(); }

  // [density, r, g, b] for cell i.
  const double* cell(std::size_t i) const noexcept { return values_.data() + 4 * i; }
  double density_slope(std::size_t i) const noexcept { return density_slope_[i]; }

 private:
  int resolution_;
  BoundingBox bbox_;
  double cell_size_;
  std::vector<double> values_;
  std::vector<double> density_slope_;
};

// Emission-absorption rendering. Each ray is sampled at samples_per_ray
// midpoints spread uniformly over its intersection with the bbox (clipped to
// [near, far]); rays that miss the bbox see the background.
ImageBuffer render(const VoxelField& field, const Camera& camera, const RenderConfig& cfg);
ImageBuffer render(const PreparedField& field, const Camera& camera, const RenderConfig& cfg);

// Exact adjoint of render: returns g^T * d(render)/d(raw parameters),
// including the trilinear weights and the softplus/sigmoid derivatives.
FieldGradient render_vjp(const VoxelField& field, const Camera& camera, const RenderConfig& cfg,
                         const ImageBuffer& image_grad);
FieldGradient render_vjp(const PreparedField& field, const Camera& camera, const RenderConfig& cfg,
                         const ImageBuffer& image_grad);

// Per-ray compositing weights T_i * alpha_i followed by the final
// transmittance; they sum to one. Exposed for tests and diagnostics.
std::vector<double> compositing_weights(const VoxelField& field, const Ray& ray, const RenderConfig& cfg);

struct Turntable {
  std::vector<ImageBuffer> images;
  std::vector<double> azimuths;  // radians
  double elevation = 0.0;
};

// n_views renders at azimuths 2*pi*k/n_views with the given elevation; the
// remaining camera parameters come from `base`.
Turntable turntable(const VoxelField& field, int n_views, double elevation, const Camera& base,
                    const RenderConfig& cfg);

}  // namespace januslab
