#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "januslab/renderer.hpp"
#include "januslab/scoremodel.hpp"
#include "support.hpp"

// Independent oracles shared by the unit tests and the acceptance binary.
namespace jltest {

using januslab::BiasConfig;
using januslab::FieldGradient;
using januslab::PatchRect;
using januslab::TemplateSet;

inline const std::vector<std::string> kBins{"front view", "back view", "side view"};
inline const std::vector<std::string> kKeys{"clean", "smiling"};

// Random templates: modes_per_bin modes per (bin, key) on an h x w grid.
inline TemplateSet random_templates(jltest::Gen& gen, int h, int w, int modes_per_bin) {
  TemplateSet t(kBins, kKeys, "front view", PatchRect{0, 0, h, w});
  for (const auto& b : kBins) {
    for (const auto& k : kKeys) {
      std::vector<ImageBuffer> modes;
      std::vector<double> az;
      for (int m = 0; m < modes_per_bin; ++m) {
        modes.push_back(gen.image(h, w, 0.1, 0.9));
        az.push_back(0.1 * m);
      }
      t.set_modes(b, k, modes, az);
    }
  }
  return t;
}

inline BiasConfig bias_with(double beta) {
  BiasConfig b;
  b.beta = beta;
  b.word_bias = {{"smiling", 0.8}};
  return b;
}

// Independent log-density oracle: mixture components written out from the
// model definition, evaluated with log-sum-exp.
struct Oracle {
  const TemplateSet& t;
  double beta;

  double log_gauss(const ImageBuffer& z, const ImageBuffer& mu, double sigma) const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) d2 += (z[i] - mu[i]) * (z[i] - mu[i]);
    const double n = static_cast<double>(z.size());
    return -d2 / (2 * sigma * sigma) - 0.5 * n * std::log(2 * M_PI * sigma * sigma);
  }

  double log_cond(const ImageBuffer& z, double sigma, std::size_t b, std::size_t k) const {
    const bool canonical = t.bins()[b] == t.canonical_bin();
    const double bb = canonical ? 0.0 : beta;
    std::vector<double> terms;
    const auto& own = t.modes(b, k);
    for (const auto& m : own) terms.push_back(std::log((1 - bb) / own.size()) + log_gauss(z, m, sigma));
    if (bb > 0) {
      const auto& can = t.modes(t.bin_index(t.canonical_bin()), k);
      for (const auto& m : can) terms.push_back(std::log(bb / can.size()) + log_gauss(z, m, sigma));
    }
    return jltest::log_sum_exp(terms);
  }

  double log_joint(const ImageBuffer& z, double sigma, std::size_t b, std::size_t k) const {
    return log_cond(z, sigma, b, k) - std::log(static_cast<double>(t.bins().size() * t.keys().size()));
  }

  double log_marginal(const ImageBuffer& z, double sigma) const {
    std::vector<double> terms;
    for (std::size_t b = 0; b < t.bins().size(); ++b)
      for (std::size_t k = 0; k < t.keys().size(); ++k) terms.push_back(log_joint(z, sigma, b, k));
    return jltest::log_sum_exp(terms);
  }

  double log_pose_posterior(const ImageBuffer& z, double sigma, std::size_t b) const {
    std::vector<double> terms;
    for (std::size_t k = 0; k < t.keys().size(); ++k) terms.push_back(log_joint(z, sigma, b, k));
    return jltest::log_sum_exp(terms) - log_marginal(z, sigma);
  }

  double log_prompt_posterior(const ImageBuffer& z, double sigma, std::size_t k) const {
    std::vector<double> terms;
    for (std::size_t b = 0; b < t.bins().size(); ++b) terms.push_back(log_joint(z, sigma, b, k));
    return jltest::log_sum_exp(terms) - log_marginal(z, sigma);
  }

  double log_joint_posterior(const ImageBuffer& z, double sigma, std::size_t b, std::size_t k) const {
    return log_joint(z, sigma, b, k) - log_marginal(z, sigma);
  }
};

// Central-difference gradient of a scalar function of the image.
template <class F>
inline ImageBuffer fd_gradient(const ImageBuffer& z, F&& f, double h = 1e-5) {
  ImageBuffer g(z.height(), z.width(), ImageKind::gradient);
  ImageBuffer zz = z;
  for (std::size_t i = 0; i < z.size(); ++i) {
    zz[i] = z[i] + h;
    const double up = f(zz);
    zz[i] = z[i] - h;
    const double down = f(zz);
    zz[i] = z[i];
    g[i] = (up - down) / (2 * h);
  }
  return g;
}

// Flattened parameter vector helpers for the finite-difference oracle.
inline std::vector<double> flat_grad(const FieldGradient& g) {
  std::vector<double> out(g.d_raw_density);
  out.insert(out.end(), g.d_raw_color.begin(), g.d_raw_color.end());
  return out;
}

inline VoxelField displaced(const VoxelField& f, const std::vector<double>& dir, double h) {
  VoxelField out = f;
  auto d = out.raw_density();
  auto c = out.raw_color();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += h * dir[i];
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += h * dir[d.size() + i];
  return out;
}

}  // namespace jltest
