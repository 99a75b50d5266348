#include "januslab/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "januslab/errors.hpp"

namespace januslab {

ImageBuffer::ImageBuffer(int height, int width, ImageKind kind, double fill)
    : height_(height), width_(width), kind_(kind) {
  if (height <= 0 || width <= 0) {
    throw InvalidArgument("image dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(height) * width * kChannels, fill);
}

double ImageBuffer::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool ImageBuffer::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": image shape mismatch (" +
                          std::to_string(a.height()) + "x" + std::to_string(a.width()) + " vs " +
                          std::to_string(b.height()) + "x" + std::to_string(b.width()) + ")");
  }
}

std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image) {
  if (image.kind() != ImageKind::radiance) {
    throw InvalidArgument("gradient buffers are not written as PPM");
  }
  const std::string header =
      "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + image.size());
  for (double v : image.data()) {
    const double clamped = std::clamp(std::isfinite(v) ? v : 0.0, 0.0, 1.0);
    bytes.push_back(static_cast<std::uint8_t>(std::lround(clamped * 255.0)));
  }
  return bytes;
}

namespace {

// Reads the next whitespace-delimited header token, skipping '#' comments.
std::string next_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos])) token.push_back(static_cast<char>(bytes[pos++]));
  return token;
}

}  // namespace

ImageBuffer decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P6") throw FormatError("not a binary PPM (P6)");
  int width = 0;
  int height = 0;
  int maxval = 0;
  try {
    width = std::stoi(next_token(bytes, pos));
    height = std::stoi(next_token(bytes, pos));
    maxval = std::stoi(next_token(bytes, pos));
  } catch (const std::exception&) {
    throw FormatError("malformed PPM header");
  }
  if (width <= 0 || height <= 0 || maxval != 255) throw FormatError("unsupported PPM header");
  ++pos;  // single whitespace byte after maxval
  ImageBuffer image(height, width);
  if (bytes.size() < pos + image.size()) throw TruncationError("PPM payload truncated");
  for (std::size_t i = 0; i < image.size(); ++i) image[i] = bytes[pos + i] / 255.0;
  return image;
}

void write_ppm(const ImageBuffer& image, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

ImageBuffer read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes);
}

ImageBuffer contact_sheet(std::span<const ImageBuffer> images) {
  if (images.empty()) throw InvalidArgument("contact sheet needs at least one image");
  const int h = images.front().height();
  const int w = images.front().width();
  ImageBuffer sheet(h, w * static_cast<int>(images.size()));
  for (std::size_t k = 0; k < images.size(); ++k) {
    require_same_shape(images.front(), images[k], "contact_sheet");
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        for (int c = 0; c < ImageBuffer::kChannels; ++c) {
          sheet.at(y, static_cast<int>(k) * w + x, c) = images[k].at(y, x, c);
        }
      }
    }
  }
  return sheet;
}

}  // namespace januslab
