#include "januslab/field.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "januslab/errors.hpp"
#include "januslab/random.hpp"

namespace januslab {

namespace {

constexpr std::uint16_t kFormatVersion = 1;
constexpr char kMagic[4] = {'J', 'L', 'A', 'B'};
constexpr std::size_t kHeaderBytes = 4 + 2 + 4 + 6 * 8;

double to_f32(double v) noexcept { return static_cast<double>(static_cast<float>(v)); }

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

VoxelField::VoxelField(int resolution, BoundingBox bbox) : resolution_(resolution), bbox_(bbox) {
  if (resolution < 2) throw InvalidArgument("field resolution must be >= 2");
  const Vec3 extent = bbox.hi - bbox.lo;
  if (!(extent.x > 0.0) || extent.x != extent.y || extent.x != extent.z) {
    throw InvalidArgument("field bbox must be a non-degenerate cube");
  }
  const auto cells = static_cast<std::size_t>(resolution) * resolution * resolution;
  raw_density_.assign(cells, 0.0);
  raw_color_.assign(cells * 3, 0.0);
}

Vec3 VoxelField::cell_center(int x, int y, int z) const noexcept {
  const double h = cell_size();
  return {bbox_.lo.x + (x + 0.5) * h, bbox_.lo.y + (y + 0.5) * h, bbox_.lo.z + (z + 0.5) * h};
}

bool VoxelField::all_finite() const noexcept {
  return januslab::all_finite(raw_density_) && januslab::all_finite(raw_color_);
}

bool FieldGradient::all_finite() const noexcept {
  return januslab::all_finite(d_raw_density) && januslab::all_finite(d_raw_color);
}

FieldGradient& FieldGradient::operator+=(const FieldGradient& other) {
  if (other.d_raw_density.size() != d_raw_density.size() ||
      other.d_raw_color.size() != d_raw_color.size()) {
    throw InvalidArgument("field gradient shape mismatch");
  }
  for (std::size_t i = 0; i < d_raw_density.size(); ++i) d_raw_density[i] += other.d_raw_density[i];
  for (std::size_t i = 0; i < d_raw_color.size(); ++i) d_raw_color[i] += other.d_raw_color[i];
  return *this;
}

OptimizerState::OptimizerState(const VoxelField& field, AdamConfig cfg)
    : config(cfg),
      m_density(field.cell_count(), 0.0),
      v_density(field.cell_count(), 0.0),
      m_color(field.cell_count() * 3, 0.0),
      v_color(field.cell_count() * 3, 0.0) {}

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double softplus_inverse(double y) {
  if (!(y > 0.0)) throw InvalidArgument("softplus_inverse needs a positive argument");
  return y + std::log(-std::expm1(-y));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("logit needs p in (0, 1)");
  return std::log(p / (1.0 - p));
}

VoxelField new_field(int resolution, InitMode mode, std::uint64_t seed, BoundingBox bbox) {
  VoxelField field(resolution, bbox);
  const double raw_density = to_f32(softplus_inverse(0.01));
  const double raw_color = 0.0;  // sigmoid(0) = 0.5
  auto density = field.raw_density();
  auto color = field.raw_color();
  std::fill(density.begin(), density.end(), raw_density);
  std::fill(color.begin(), color.end(), raw_color);
  if (mode == InitMode::seeded_noise) {
    const CounterRng rng(seed, streams::kFieldInit);
    const std::size_t n = density.size();
    for (std::size_t i = 0; i < n; ++i) density[i] = to_f32(density[i] + 0.2 * rng.uniform(i) - 0.1);
    for (std::size_t i = 0; i < color.size(); ++i) color[i] = to_f32(color[i] + 0.2 * rng.uniform(n + i) - 0.1);
  }
  return field;
}

ActivatedField activate(const VoxelField& field) {
  ActivatedField out;
  const auto density = field.raw_density();
  const auto color = field.raw_color();
  out.density.resize(density.size());
  out.color.resize(color.size());
  std::transform(density.begin(), density.end(), out.density.begin(), softplus);
  std::transform(color.begin(), color.end(), out.color.begin(), sigmoid);
  return out;
}

std::optional<TrilinearStencil> stencil_at(const VoxelField& field, const Vec3& p) noexcept {
  const BoundingBox& box = field.bbox();
  if (!box.contains(p)) return std::nullopt;
  const int n = field.resolution();
  const double h = field.cell_size();
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int axis = 0; axis < 3; ++axis) {
    const double u = std::clamp((p[axis] - box.lo[axis]) / h - 0.5, 0.0, static_cast<double>(n - 1));
    const int i0 = std::min(static_cast<int>(std::floor(u)), n - 2);
    base[axis] = i0;
    frac[axis] = u - i0;
  }
  TrilinearStencil s;
  int k = 0;
  for (int dz = 0; dz < 2; ++dz) {
    const double wz = dz ? frac[2] : 1.0 - frac[2];
    for (int dy = 0; dy < 2; ++dy) {
      const double wy = dy ? frac[1] : 1.0 - frac[1];
      for (int dx = 0; dx < 2; ++dx) {
        const double wx = dx ? frac[0] : 1.0 - frac[0];
        s.cell[k] = field.cell_index(base[0] + dx, base[1] + dy, base[2] + dz);
        s.weight[k] = wx * wy * wz;
        ++k;
      }
    }
  }
  return s;
}

FieldSample sample_field(const VoxelField& field, const Vec3& point) {
  if (!is_finite(point)) throw InvalidArgument("sample_field: non-finite point");
  const auto stencil = stencil_at(field, point);
  if (!stencil) return {};
  const auto density = field.raw_density();
  const auto color = field.raw_color();
  FieldSample out;
  for (int k = 0; k < 8; ++k) {
    const std::size_t c = stencil->cell[k];
    const double w = stencil->weight[k];
    out.density += w * softplus(density[c]);
    out.color += w * Vec3{sigmoid(color[3 * c]), sigmoid(color[3 * c + 1]), sigmoid(color[3 * c + 2])};
  }
  return out;
}

namespace {

void adam_block(std::span<double> params, std::span<const double> grad, std::span<double> m,
                std::span<double> v, const AdamConfig& cfg, double bias1, double bias2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    params[i] = to_f32(params[i] + cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon));
  }
}

}  // namespace

void apply_update(VoxelField& field, const FieldGradient& grad, OptimizerState& opt) {
  if (!grad.matches(field)) throw InvalidArgument("apply_update: gradient shape does not match field");
  if (opt.m_density.size() != field.cell_count() || opt.v_density.size() != field.cell_count() ||
      opt.m_color.size() != field.cell_count() * 3 || opt.v_color.size() != field.cell_count() * 3) {
    throw InvalidArgument("apply_update: optimizer state shape does not match field");
  }
  if (!grad.all_finite()) throw NonFiniteError("apply_update: non-finite gradient rejected");

  opt.step += 1;
  const AdamConfig& cfg = opt.config;
  const double bias1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(opt.step));
  const double bias2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(opt.step));
  adam_block(field.raw_density(), grad.d_raw_density, opt.m_density, opt.v_density, cfg, bias1, bias2);
  adam_block(field.raw_color(), grad.d_raw_color, opt.m_color, opt.v_color, cfg, bias1, bias2);
}

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  using U = std::conditional_t<sizeof(T) == 2, std::uint16_t,
                               std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) bits |= static_cast<U>(static_cast<U>(bytes[pos + b]) << (8 * b));
  pos += sizeof(T);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::vector<std::uint8_t> encode_field(const VoxelField& field) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(kHeaderBytes + 4 * 4 * field.cell_count());
  put_le<std::uint16_t>(out, kFormatVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(field.resolution()));
  for (int axis = 0; axis < 3; ++axis) put_le<double>(out, field.bbox().lo[axis]);
  for (int axis = 0; axis < 3; ++axis) put_le<double>(out, field.bbox().hi[axis]);
  for (double v : field.raw_density()) put_le<float>(out, static_cast<float>(v));
  for (double v : field.raw_color()) put_le<float>(out, static_cast<float>(v));
  return out;
}

VoxelField decode_field(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("field file: bad magic bytes");
  }
  if (bytes.size() < kHeaderBytes) throw TruncationError("field file: truncated header");
  std::size_t pos = 4;
  const auto version = get_le<std::uint16_t>(bytes, pos);
  if (version != kFormatVersion) throw FormatError("field file: unsupported version " + std::to_string(version));
  const auto resolution = get_le<std::uint32_t>(bytes, pos);
  BoundingBox box;
  box.lo = {get_le<double>(bytes, pos), get_le<double>(bytes, pos), get_le<double>(bytes, pos)};
  box.hi = {get_le<double>(bytes, pos), get_le<double>(bytes, pos), get_le<double>(bytes, pos)};
  if (resolution < 2 || resolution > 1024) throw FormatError("field file: invalid resolution");
  VoxelField field = [&] {
    try {
      return VoxelField(static_cast<int>(resolution), box);
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("field file: ") + e.what());
    }
  }();
  const std::size_t payload = 4 * 4 * field.cell_count();
  if (bytes.size() < kHeaderBytes + payload) throw TruncationError("field file: truncated payload");
  if (bytes.size() > kHeaderBytes + payload) throw FormatError("field file: trailing bytes after payload");
  for (double& v : field.raw_density()) v = get_le<float>(bytes, pos);
  for (double& v : field.raw_color()) v = get_le<float>(bytes, pos);
  if (!field.all_finite()) throw FormatError("field file: non-finite parameter");
  return field;
}

void save_field(const VoxelField& field, const std::filesystem::path& path) {
  const auto bytes = encode_field(field);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

VoxelField load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_field(bytes);
}

}  // namespace januslab
