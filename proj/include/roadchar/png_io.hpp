#pragma once

// PNG codecs for the on-disk contract: 8-bit RGB / grayscale images,
// 16-bit grayscale depth in millimeters, 8-bit 0/255 masks.

#include <png.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "roadchar/error.hpp"
#include "roadchar/raster.hpp"

namespace roadchar::png {

namespace detail {

struct ImageHandle {
  png_image image{};
  ImageHandle() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~ImageHandle() { png_image_free(&image); }
  ImageHandle(const ImageHandle&) = delete;
  ImageHandle& operator=(const ImageHandle&) = delete;
};

inline void fail(const std::filesystem::path& path, const png_image& image, const char* what) {
  throw Error(ErrorCode::kIo, std::string(what) + " " + path.string() + ": " + image.message);
}

// Reads `path`, converting to `format`. Returns raw bytes plus dims.
template <typename Sample>
std::vector<Sample> read_as(const std::filesystem::path& path, png_uint_32 format, int& width,
                            int& height, bool* was_16bit = nullptr) {
  ImageHandle h;
  if (!png_image_begin_read_from_file(&h.image, path.string().c_str())) {
    fail(path, h.image, "cannot open");
  }
  if (was_16bit) *was_16bit = (h.image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  h.image.format = format;
  width = static_cast<int>(h.image.width);
  height = static_cast<int>(h.image.height);
  std::vector<Sample> buffer(PNG_IMAGE_SIZE(h.image) / sizeof(Sample));
  if (!png_image_finish_read(&h.image, nullptr, buffer.data(), 0, nullptr)) {
    fail(path, h.image, "cannot decode");
  }
  return buffer;
}

template <typename Sample>
void write_as(const std::filesystem::path& path, png_uint_32 format, int width, int height,
              const Sample* data) {
  ImageHandle h;
  h.image.width = static_cast<png_uint_32>(width);
  h.image.height = static_cast<png_uint_32>(height);
  h.image.format = format;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!png_image_write_to_file(&h.image, path.string().c_str(), 0, data, 0, nullptr)) {
    fail(path, h.image, "cannot write");
  }
}

}  // namespace detail

/// Any PNG as 3-channel 8-bit RGB (gray is replicated, alpha dropped).
inline RasterImage read_rgb(const std::filesystem::path& path) {
  int w = 0;
  int h = 0;
  auto bytes = detail::read_as<std::uint8_t>(path, PNG_FORMAT_RGB, w, h);
  return RasterImage(w, h, 3, std::move(bytes));
}

inline void write_image(const std::filesystem::path& path, const RasterImage& image) {
  detail::write_as(path, image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY, image.width(),
                   image.height(), image.samples().data());
}

/// 16-bit single-channel PNG, sample value = millimeters, 0 = missing.
/// Stored samples are copied verbatim (16-bit files carry linear data).
inline DepthMap read_depth(const std::filesystem::path& path) {
  int w = 0;
  int h = 0;
  bool is16 = false;
  auto samples = detail::read_as<std::uint16_t>(path, PNG_FORMAT_LINEAR_Y, w, h, &is16);
  if (!is16) {
    throw Error(ErrorCode::kIo, "depth PNG must be 16-bit: " + path.string());
  }
  return DepthMap(w, h, std::move(samples));
}

inline void write_depth(const std::filesystem::path& path, const DepthMap& depth) {
  detail::write_as(path, PNG_FORMAT_LINEAR_Y, depth.width(), depth.height(),
                   depth.samples().data());
}

/// 8-bit mask PNG; any nonzero sample is foreground.
inline BinaryMask read_mask(const std::filesystem::path& path) {
  int w = 0;
  int h = 0;
  auto bytes = detail::read_as<std::uint8_t>(path, PNG_FORMAT_GRAY, w, h);
  BinaryMask mask(w, h);
  for (std::size_t i = 0; i < bytes.size(); ++i) mask.bits()[i] = bytes[i] != 0 ? 1 : 0;
  return mask;
}

inline void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<std::uint8_t> bytes(mask.bits().size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = mask.bits()[i] ? 255 : 0;
  detail::write_as(path, PNG_FORMAT_GRAY, mask.width(), mask.height(), bytes.data());
}

}  // namespace roadchar::png
