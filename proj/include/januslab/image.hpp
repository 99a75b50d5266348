#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace januslab {

// Radiance buffers hold colors (nominally [0,1], stored unclamped); gradient
// buffers hold scores and other image-space vectors.
enum class ImageKind { radiance, gradient };

// H x W x 3 image, row-major with interleaved channels.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  ImageBuffer(int height, int width, ImageKind kind = ImageKind::radiance, double fill = 0.0);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  ImageKind kind() const noexcept { return kind_; }
  void set_kind(ImageKind kind) noexcept { kind_ = kind; }

  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * kChannels + c;
  }
  double& at(int y, int x, int c) { return values_[index(y, x, c)]; }
  double at(int y, int x, int c) const { return values_[index(y, x, c)]; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  std::span<double> data() noexcept { return values_; }
  std::span<const double> data() const noexcept { return values_; }

  bool same_shape(const ImageBuffer& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  double max_abs() const noexcept;
  bool all_finite() const noexcept;

  friend bool operator==(const ImageBuffer& a, const ImageBuffer& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.values_ == b.values_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  ImageKind kind_ = ImageKind::radiance;
  std::vector<double> values_;
};

// Throws InvalidArgument unless a and b have identical dimensions.
void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what);

// Binary P6 with 8-bit channels; values are clamped to [0,1] then rounded.
// Gradient buffers are rejected.
std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image);
ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes);
void write_ppm(const ImageBuffer& image, const std::filesystem::path& path);
ImageBuffer read_ppm(const std::filesystem::path& path);

// Horizontal strip of equally sized images.
ImageBuffer contact_sheet(std::span<const ImageBuffer> images);

}  // namespace januslab
