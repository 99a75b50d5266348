#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "januslab/vec3.hpp"

namespace januslab {

// Axis-aligned cube holding the grid.
struct BoundingBox {
  Vec3 lo{-1.0, -1.0, -1.0};
  Vec3 hi{1.0, 1.0, 1.0};

  bool contains(const Vec3& p) const noexcept {
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
  }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

enum class InitMode { constant, seeded_noise };

/// Voxel radiance field: an N^3 grid of unconstrained raw densities and raw
/// RGB colors. Cells are stored x-fastest (index = x + N*(y + N*z)); colors
/// are interleaved per cell. Density is activated with softplus and color
/// with a sigmoid before any interpolation.
///
/// Values are held in double precision but every field produced by
/// new_field/apply_update/load_field is exactly representable in float, which
/// is what makes the f32 file format round-trip bitwise.
class VoxelField {
 public:
  explicit VoxelField(int resolution, BoundingBox bbox = {});

  int resolution() const noexcept { return resolution_; }
  const BoundingBox& bbox() const noexcept { return bbox_; }
  std::size_t cell_count() const noexcept { return raw_density_.size(); }
  double cell_size() const noexcept { return (bbox_.hi.x - bbox_.lo.x) / resolution_; }

  std::size_t cell_index(int x, int y, int z) const noexcept {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(resolution_) * (static_cast<std::size_t>(y) +
                                                    static_cast<std::size_t>(resolution_) * z);
  }
  // World-space center of cell (x, y, z).
  Vec3 cell_center(int x, int y, int z) const noexcept;

  std::span<double> raw_density() noexcept { return raw_density_; }
  std::span<const double> raw_density() const noexcept { return raw_density_; }
  std::span<double> raw_color() noexcept { return raw_color_; }
  std::span<const double> raw_color() const noexcept { return raw_color_; }

  bool all_finite() const noexcept;

  friend bool operator==(const VoxelField&, const VoxelField&) = default;

 private:
  int resolution_;
  BoundingBox bbox_;
  std::vector<double> raw_density_;
  std::vector<double> raw_color_;
};

// d(objective)/d(raw parameter), same layout as VoxelField.
struct FieldGradient {
  std::vector<double> d_raw_density;
  std::vector<double> d_raw_color;

  FieldGradient() = default;
  explicit FieldGradient(std::size_t cells) : d_raw_density(cells, 0.0), d_raw_color(cells * 3, 0.0) {}

  bool matches(const VoxelField& field) const noexcept {
    return d_raw_density.size() == field.cell_count() && d_raw_color.size() == field.cell_count() * 3;
  }
  bool all_finite() const noexcept;
  FieldGradient& operator+=(const FieldGradient& other);
};

struct AdamConfig {
  double learning_rate = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::vector<double> m_density, v_density;
  std::vector<double> m_color, v_color;
  std::int64_t step = 0;

  OptimizerState() = default;
  OptimizerState(const VoxelField& field, AdamConfig cfg);
};

double softplus(double x) noexcept;
double softplus_inverse(double y);
double sigmoid(double x) noexcept;
double logit(double p);

VoxelField new_field(int resolution, InitMode mode, std::uint64_t seed, BoundingBox bbox = {});

// Activated grids, computed once per render.
struct ActivatedField {
  std::vector<double> density;  // softplus(raw_density)
  std::vector<double> color;    // sigmoid(raw_color), 3 per cell
};
ActivatedField activate(const VoxelField& field);

// The eight grid nodes around a point and their trilinear weights. Nodes sit
// at cell centers; between the outermost centers and the bbox faces the
// interpolation clamps to the edge node.
struct TrilinearStencil {
  std::array<std::size_t, 8> cell{};
  std::array<double, 8> weight{};
};
// Empty when p lies outside the bbox.
std::optional<TrilinearStencil> stencil_at(const VoxelField& field, const Vec3& p) noexcept;

struct FieldSample {
  double density = 0.0;
  Vec3 color{};
};
// Throws InvalidArgument for non-finite points.
FieldSample sample_field(const VoxelField& field, const Vec3& point);

// Adam ascent step (+grad direction). Validates shapes and finiteness before
// touching anything, so on error both field and state are unchanged.
void apply_update(VoxelField& field, const FieldGradient& grad, OptimizerState& opt);

// Binary format: "JLAB", u16 version, u32 resolution, 6 x f64 bbox
// (lo.xyz, hi.xyz), then raw_density and raw_color as little-endian f32.
void save_field(const VoxelField& field, const std::filesystem::path& path);
VoxelField load_field(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_field(const VoxelField& field);
VoxelField decode_field(std::span<const std::uint8_t> bytes);

}  // namespace januslab
