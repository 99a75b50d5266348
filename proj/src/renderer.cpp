#include "januslab/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "januslab/errors.hpp"
#include "januslab/parallel.hpp"

namespace januslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Fixed number of adjoint accumulation buffers, independent of the worker
// count, merged in order.
constexpr std::size_t kAdjointChunks = 4;

struct Segment {
  double t0;
  double t1;
};

std::optional<Segment> clip_to_box(const Ray& ray, const BoundingBox& box, const RenderConfig& cfg) {
  double t0 = cfg.near;
  double t1 = cfg.far;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    if (std::abs(d) < 1e-15) {
      if (o < box.lo[axis] || o > box.hi[axis]) return std::nullopt;
      continue;
    }
    double ta = (box.lo[axis] - o) / d;
    double tb = (box.hi[axis] - o) / d;
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t1 > t0)) return std::nullopt;
  return Segment{t0, t1};
}

// Trilinear lookup in the prepared grid. Same node placement and edge
// clamping as stencil_at; the 8 corners are base + {0, 1} x {0, N} x {0, N^2}.
struct Sample {
  std::size_t base = 0;
  double fx = 0.0, fy = 0.0, fz = 0.0;
  double density = 0.0;
  Vec3 color{};
};

inline void locate(const PreparedField& f, const Vec3& p, Sample& s) noexcept {
  const int n = f.resolution();
  const double inv_h = 1.0 / f.cell_size();
  const BoundingBox& box = f.bbox();
  int i0[3];
  double fr[3];
  for (int axis = 0; axis < 3; ++axis) {
    const double u = std::clamp((p[axis] - box.lo[axis]) * inv_h - 0.5, 0.0, static_cast<double>(n - 1));
    const int i = std::min(static_cast<int>(u), n - 2);
    i0[axis] = i;
    fr[axis] = u - i;
  }
  const auto N = static_cast<std::size_t>(n);
  s.base = static_cast<std::size_t>(i0[0]) + N * (static_cast<std::size_t>(i0[1]) + N * static_cast<std::size_t>(i0[2]));
  s.fx = fr[0];
  s.fy = fr[1];
  s.fz = fr[2];
}

template <class Visit>
inline void for_corners(const PreparedField& f, const Sample& s, Visit&& visit) noexcept {
  const std::size_t n = static_cast<std::size_t>(f.resolution());
  const std::size_t off[8] = {0, 1, n, n + 1, n * n, n * n + 1, n * n + n, n * n + n + 1};
  const double wx[2] = {1.0 - s.fx, s.fx};
  const double wy[2] = {1.0 - s.fy, s.fy};
  const double wz[2] = {1.0 - s.fz, s.fz};
  for (int k = 0; k < 8; ++k) visit(s.base + off[k], wx[k & 1] * wy[(k >> 1) & 1] * wz[k >> 2]);
}

inline void interpolate(const PreparedField& f, Sample& s) noexcept {
  double d = 0.0, r = 0.0, g = 0.0, b = 0.0;
  for_corners(f, s, [&](std::size_t c, double w) {
    const double* v = f.cell(c);
    d += w * v[0];
    r += w * v[1];
    g += w * v[2];
    b += w * v[3];
  });
  s.density = d;
  s.color = {r, g, b};
}

Vec3 march(const PreparedField& f, const Ray& ray, const RenderConfig& cfg) {
  const auto seg = clip_to_box(ray, f.bbox(), cfg);
  if (!seg) return cfg.background;
  const int n = cfg.samples_per_ray;
  const double delta = (seg->t1 - seg->t0) / n;
  double transmittance = 1.0;
  Vec3 color{};
  Sample s;
  for (int i = 0; i < n; ++i) {
    locate(f, ray.origin + ray.direction * (seg->t0 + (i + 0.5) * delta), s);
    interpolate(f, s);
    const double alpha = 1.0 - std::exp(-s.density * delta);
    color += s.color * (transmittance * alpha);
    transmittance *= 1.0 - alpha;
  }
  return color + cfg.background * transmittance;
}

// Accumulates g^T d(pixel)/d(activated values) into `acc` (4 per cell).
void march_adjoint(const PreparedField& f, const Ray& ray, const RenderConfig& cfg, const Vec3& g,
                   std::vector<Sample>& samples, std::vector<double>& acc) {
  const auto seg = clip_to_box(ray, f.bbox(), cfg);
  if (!seg) return;
  const int n = cfg.samples_per_ray;
  const double delta = (seg->t1 - seg->t0) / n;
  samples.resize(static_cast<std::size_t>(n));
  double transmittance = 1.0;
  Vec3 total{};
  for (int i = 0; i < n; ++i) {
    Sample& s = samples[static_cast<std::size_t>(i)];
    locate(f, ray.origin + ray.direction * (seg->t0 + (i + 0.5) * delta), s);
    interpolate(f, s);
    const double alpha = 1.0 - std::exp(-s.density * delta);
    total += s.color * (transmittance * alpha);
    transmittance *= 1.0 - alpha;
  }
  total += cfg.background * transmittance;

  transmittance = 1.0;
  Vec3 accumulated{};
  for (const Sample& s : samples) {
    const double alpha = 1.0 - std::exp(-s.density * delta);
    const double weight = transmittance * alpha;
    accumulated += s.color * weight;
    const double next = transmittance * (1.0 - alpha);
    // d(pixel)/d(density_i) = delta * (T_{i+1} c_i - everything composited behind sample i)
    const double d_density = delta * (next * dot(g, s.color) - dot(g, total - accumulated));
    const double gr = weight * g.x, gg = weight * g.y, gb = weight * g.z;
    for_corners(f, s, [&](std::size_t c, double w) {
      double* a = acc.data() + 4 * c;
      a[0] += w * d_density;
      a[1] += w * gr;
      a[2] += w * gg;
      a[3] += w * gb;
    });
    transmittance = next;
  }
}

}  // namespace

PreparedField::PreparedField(const VoxelField& field)
    : resolution_(field.resolution()),
      bbox_(field.bbox()),
      cell_size_(field.cell_size()),
      values_(4 * field.cell_count()),
      density_slope_(field.cell_count()) {
  const auto density = field.raw_density();
  const auto color = field.raw_color();
  for (std::size_t i = 0; i < density.size(); ++i) {
    const double x = density[i];
    const double e = std::exp(-std::abs(x));
    values_[4 * i] = std::max(x, 0.0) + std::log1p(e);
    density_slope_[i] = x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    for (int c = 0; c < 3; ++c) values_[4 * i + 1 + c] = sigmoid(color[3 * i + c]);
  }
}

Vec3 Camera::position() const noexcept {
  return {radius * std::cos(elevation) * std::sin(azimuth), radius * std::sin(elevation),
          radius * std::cos(elevation) * std::cos(azimuth)};
}

void validate_camera(const Camera& camera) {
  if (!(camera.azimuth >= 0.0 && camera.azimuth < kTwoPi)) throw InvalidArgument("camera azimuth outside [0, 2pi)");
  if (!(std::abs(camera.elevation) <= std::numbers::pi / 2)) {
    throw InvalidArgument("camera elevation outside [-pi/2, pi/2]");
  }
  if (!(camera.radius > 0.0) || !std::isfinite(camera.radius)) throw InvalidArgument("camera radius must be > 0");
  if (!(camera.fov_y > 0.0 && camera.fov_y < std::numbers::pi)) throw InvalidArgument("camera fov outside (0, pi)");
  if (camera.height < 4 || camera.width < 4) throw InvalidArgument("camera image must be at least 4x4");
}

Camera make_camera(double azimuth, double elevation, double radius, double fov_y, int height, int width) {
  if (!std::isfinite(azimuth)) throw InvalidArgument("camera azimuth must be finite");
  double wrapped = std::fmod(azimuth, kTwoPi);
  if (wrapped < 0.0) wrapped += kTwoPi;
  if (wrapped >= kTwoPi) wrapped = 0.0;
  Camera camera{wrapped, elevation, radius, fov_y, height, width};
  validate_camera(camera);
  return camera;
}

Ray camera_ray(const Camera& camera, int y, int x) noexcept {
  const Vec3 origin = camera.position();
  const Vec3 forward = normalized(-origin);
  Vec3 up_hint{0.0, 1.0, 0.0};
  if (std::abs(dot(forward, up_hint)) > 1.0 - 1e-9) up_hint = {0.0, 0.0, -1.0};
  const Vec3 right = normalized(cross(forward, up_hint));
  const Vec3 up = cross(right, forward);
  const double tan_half = std::tan(0.5 * camera.fov_y);
  const double aspect = static_cast<double>(camera.width) / camera.height;
  const double ndc_x = (2.0 * (x + 0.5) / camera.width - 1.0) * tan_half * aspect;
  const double ndc_y = (1.0 - 2.0 * (y + 0.5) / camera.height) * tan_half;
  return {origin, normalized(forward + right * ndc_x + up * ndc_y)};
}

void validate_render_config(const RenderConfig& cfg, const Camera& camera, const BoundingBox& box) {
  if (cfg.samples_per_ray < 8) throw InvalidArgument("samples_per_ray must be >= 8");
  if (!(cfg.near < cfg.far)) throw InvalidArgument("render near must be < far");
  for (int c = 0; c < 3; ++c) {
    if (!(cfg.background[c] >= 0.0 && cfg.background[c] <= 1.0)) throw InvalidArgument("background outside [0,1]");
  }
  // The [near, far] shell must contain the whole bbox as seen from the camera.
  double max_corner = 0.0;
  for (int i = 0; i < 8; ++i) {
    const Vec3 corner{(i & 1) ? box.hi.x : box.lo.x, (i & 2) ? box.hi.y : box.lo.y, (i & 4) ? box.hi.z : box.lo.z};
    max_corner = std::max(max_corner, norm(corner));
  }
  if (cfg.near > camera.radius - max_corner || cfg.far < camera.radius + max_corner) {
    throw InvalidArgument("render near/far do not cover the field bbox for radius " + std::to_string(camera.radius));
  }
}

ImageBuffer render(const VoxelField& field, const Camera& camera, const RenderConfig& cfg) {
  return render(PreparedField(field), camera, cfg);
}

ImageBuffer render(const PreparedField& field, const Camera& camera, const RenderConfig& cfg) {
  validate_camera(camera);
  validate_render_config(cfg, camera, field.bbox());
  ImageBuffer image(camera.height, camera.width, ImageKind::radiance);
  parallel_chunks(static_cast<std::size_t>(camera.height), [&](std::size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < camera.width; ++x) {
      const Vec3 c = march(field, camera_ray(camera, y, x), cfg);
      image.at(y, x, 0) = c.x;
      image.at(y, x, 1) = c.y;
      image.at(y, x, 2) = c.z;
    }
  });
  return image;
}

FieldGradient render_vjp(const VoxelField& field, const Camera& camera, const RenderConfig& cfg,
                         const ImageBuffer& image_grad) {
  return render_vjp(PreparedField(field), camera, cfg, image_grad);
}

FieldGradient render_vjp(const PreparedField& field, const Camera& camera, const RenderConfig& cfg,
                         const ImageBuffer& image_grad) {
  validate_camera(camera);
  validate_render_config(cfg, camera, field.bbox());
  if (image_grad.height() != camera.height || image_grad.width() != camera.width) {
    throw InvalidArgument("render_vjp: image gradient does not match camera image size");
  }
  const std::size_t cells = field.cell_count();
  std::vector<std::vector<double>> partial(kAdjointChunks);
  const int rows_per_chunk = (camera.height + static_cast<int>(kAdjointChunks) - 1) / static_cast<int>(kAdjointChunks);
  parallel_chunks(kAdjointChunks, [&](std::size_t chunk) {
    const int y_begin = static_cast<int>(chunk) * rows_per_chunk;
    const int y_end = std::min(camera.height, y_begin + rows_per_chunk);
    std::vector<Sample> samples;
    for (int y = y_begin; y < y_end; ++y) {
      for (int x = 0; x < camera.width; ++x) {
        const Vec3 g{image_grad.at(y, x, 0), image_grad.at(y, x, 1), image_grad.at(y, x, 2)};
        if (g == Vec3{}) continue;
        if (partial[chunk].empty()) partial[chunk].assign(4 * cells, 0.0);
        march_adjoint(field, camera_ray(camera, y, x), cfg, g, samples, partial[chunk]);
      }
    }
  });

  FieldGradient grad(cells);
  for (const auto& acc : partial) {
    if (acc.empty()) continue;
    for (std::size_t i = 0; i < cells; ++i) {
      grad.d_raw_density[i] += acc[4 * i];
      for (int c = 0; c < 3; ++c) grad.d_raw_color[3 * i + c] += acc[4 * i + 1 + c];
    }
  }
  for (std::size_t i = 0; i < cells; ++i) {
    grad.d_raw_density[i] *= field.density_slope(i);
    for (int c = 0; c < 3; ++c) {
      const double s = field.cell(i)[1 + c];
      grad.d_raw_color[3 * i + c] *= s * (1.0 - s);
    }
  }
  return grad;
}

std::vector<double> compositing_weights(const VoxelField& field, const Ray& ray, const RenderConfig& cfg) {
  std::vector<double> weights;
  const auto seg = clip_to_box(ray, field.bbox(), cfg);
  if (!seg) return {1.0};
  const PreparedField prepared(field);
  const int n = cfg.samples_per_ray;
  const double delta = (seg->t1 - seg->t0) / n;
  double transmittance = 1.0;
  Sample s;
  for (int i = 0; i < n; ++i) {
    locate(prepared, ray.origin + ray.direction * (seg->t0 + (i + 0.5) * delta), s);
    interpolate(prepared, s);
    const double alpha = 1.0 - std::exp(-s.density * delta);
    weights.push_back(transmittance * alpha);
    transmittance *= 1.0 - alpha;
  }
  weights.push_back(transmittance);
  return weights;
}

Turntable turntable(const VoxelField& field, int n_views, double elevation, const Camera& base,
                    const RenderConfig& cfg) {
  if (n_views < 2) throw InvalidArgument("turntable needs at least 2 views");
  const PreparedField prepared(field);
  Turntable out;
  out.elevation = elevation;
  out.images.reserve(static_cast<std::size_t>(n_views));
  for (int k = 0; k < n_views; ++k) {
    const double azimuth = kTwoPi * k / n_views;
    const Camera cam = make_camera(azimuth, elevation, base.radius, base.fov_y, base.height, base.width);
    out.azimuths.push_back(cam.azimuth);
    out.images.push_back(render(prepared, cam, cfg));
  }
  return out;
}

}  // namespace januslab
