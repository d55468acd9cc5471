#include "robodata/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <cstring>
#include <memory>

namespace robodata {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

[[noreturn]] void fail(const std::filesystem::path& path, const char* what) {
  throw IoError(std::string(what) + ": " + path.string());
}

}  // namespace

ImageRgb8 read_png_rgb8(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail(path, "libpng init failed");
  ImageRgb8 out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "corrupt PNG");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  // Normalize whatever arrives to 8-bit RGB.
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(w);
  out.height = static_cast<int>(h);
  out.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 r = 0; r < h; ++r) rows[r] = out.pixels.data() + std::size_t(r) * w * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png_rgb8(const std::filesystem::path& path, const ImageRgb8& image) {
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
    throw ShapeMismatchError("write_png_rgb8: pixel buffer does not match dimensions");
  }
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "PNG write failed");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int r = 0; r < image.height; ++r) {
    png_write_row(png, const_cast<png_bytep>(image.pixels.data() +
                                             std::size_t(r) * image.width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageGray16 read_png_gray16(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail(path, "libpng init failed");
  ImageGray16 out;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "corrupt PNG");
  }
  png_init_io(png, f.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(png, info) != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "expected 16-bit grayscale PNG");
  }
  png_set_swap(png);  // PNG stores 16-bit big-endian
  png_read_update_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  out.width = static_cast<int>(w);
  out.height = static_cast<int>(h);
  out.pixels.resize(static_cast<std::size_t>(w) * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 r = 0; r < h; ++r) {
    rows[r] = reinterpret_cast<png_bytep>(out.pixels.data() + std::size_t(r) * w);
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void write_png_gray16(const std::filesystem::path& path, const ImageGray16& image) {
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height) {
    throw ShapeMismatchError("write_png_gray16: pixel buffer does not match dimensions");
  }
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail(path, "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "PNG write failed");
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, image.width, image.height, 16, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);
  for (int r = 0; r < image.height; ++r) {
    png_write_row(png, reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(
                           image.pixels.data() + std::size_t(r) * image.width)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::pair<int, int> png_dimensions(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  unsigned char header[24];
  if (std::fread(header, 1, sizeof(header), f.get()) != sizeof(header)) {
    fail(path, "truncated PNG header");
  }
  static const unsigned char signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (std::memcmp(header, signature, 8) != 0 || std::memcmp(header + 12, "IHDR", 4) != 0) {
    fail(path, "not a PNG file");
  }
  auto be32 = [&](int off) {
    return (int(header[off]) << 24) | (int(header[off + 1]) << 16) | (int(header[off + 2]) << 8) |
           int(header[off + 3]);
  };
  return {be32(16), be32(20)};
}

std::array<Eigen::MatrixXd, 3> rgb_planes(const ImageRgb8& image) {
  std::array<Eigen::MatrixXd, 3> planes;
  for (auto& p : planes) p.resize(image.height, image.width);
  std::size_t i = 0;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      planes[0](r, c) = image.pixels[i++] / 255.0;
      planes[1](r, c) = image.pixels[i++] / 255.0;
      planes[2](r, c) = image.pixels[i++] / 255.0;
    }
  }
  return planes;
}

Eigen::MatrixXd depth_to_meters(const ImageGray16& image) {
  Eigen::MatrixXd out(image.height, image.width);
  std::size_t i = 0;
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      out(r, c) = image.pixels[i++] / 1000.0;
    }
  }
  return out;
}

}  // namespace robodata
