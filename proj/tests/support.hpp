#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "januslab/field.hpp"
#include "januslab/image.hpp"
#include "januslab/renderer.hpp"

namespace jltest {

using januslab::ImageBuffer;
using januslab::ImageKind;
using januslab::VoxelField;

// Hand-rolled generators for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  ImageBuffer image(int h, int w, double lo = 0.0, double hi = 1.0, ImageKind kind = ImageKind::radiance) {
    ImageBuffer img(h, w, kind);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = uniform(lo, hi);
    return img;
  }

  ImageBuffer gradient(int h, int w, double scale = 1.0) {
    ImageBuffer img(h, w, ImageKind::gradient);
    for (std::size_t i = 0; i < img.size(); ++i) img[i] = scale * normal();
    return img;
  }

  // Random field with a visible blob so rays see both empty and dense cells.
  VoxelField field(int n) {
    VoxelField f(n);
    auto d = f.raw_density();
    auto c = f.raw_color();
    for (int z = 0; z < n; ++z) {
      for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
          const std::size_t i = f.cell_index(x, y, z);
          const januslab::Vec3 p = f.cell_center(x, y, z);
          const double r2 = p.x * p.x + p.y * p.y + p.z * p.z;
          d[i] = uniform(-1.0, 1.0) + (r2 < 0.5 ? 1.5 : -2.0);
        }
      }
    }
    for (auto& v : c) v = uniform(-2.0, 2.0);
    return f;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// ||a - b|| / max(||b||, floor)
inline double rel_err(std::span<const double> a, std::span<const double> b, double floor = 1e-300) {
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(diff) / std::max(norm(b), floor);
}

inline double rel_err(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

inline double log_sum_exp(const std::vector<double>& v) {
  double hi = -INFINITY;
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

}  // namespace jltest
