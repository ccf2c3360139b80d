#include "ptycho/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ptycho {

namespace fs = std::filesystem;

namespace {

void write_png(const fs::path& path, const std::vector<unsigned char>& pixels,
               int rows, int cols, bool rgb) {
  const fs::path tmp = path.string() + ".tmp";
  FILE* fp = std::fopen(tmp.string().c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot open for write: " + tmp.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw std::runtime_error("png write failed: " + path.string());
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, cols, rows, 8,
               rgb ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const int stride = cols * (rgb ? 3 : 1);
  for (int r = 0; r < rows; ++r) {
    png_write_row(png, const_cast<unsigned char*>(pixels.data() + r * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
  fs::rename(tmp, path);
}

}  // namespace

void write_magnitude_png(const ComplexTensor& field, const fs::path& path) {
  double peak = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    peak = std::max(peak, std::hypot(field.re()[i], field.im()[i]));
  }
  if (peak == 0.0) peak = 1.0;
  std::vector<unsigned char> px(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double v = std::hypot(field.re()[i], field.im()[i]) / peak;
    px[i] = static_cast<unsigned char>(std::lround(255.0 * v));
  }
  write_png(path, px, field.rows(), field.cols(), false);
}

void write_phase_png(const ComplexTensor& field, const fs::path& path) {
  std::vector<unsigned char> px(field.size() * 3);
  constexpr double third = 2.0 * std::numbers::pi / 3.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double p = std::atan2(field.im()[i], field.re()[i]);
    const double ch[3] = {0.5 + 0.5 * std::cos(p),
                          0.5 + 0.5 * std::cos(p - third),
                          0.5 + 0.5 * std::cos(p + third)};
    for (int k = 0; k < 3; ++k) {
      px[3 * i + k] = static_cast<unsigned char>(std::lround(255.0 * ch[k]));
    }
  }
  write_png(path, px, field.rows(), field.cols(), true);
}

void write_real_png(const ComplexTensor& plane, const fs::path& path) {
  double lo = plane.re()[0], hi = plane.re()[0];
  for (double v : plane.re()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double span = hi - lo > 0.0 ? hi - lo : 1.0;
  std::vector<unsigned char> px(plane.size());
  for (std::size_t i = 0; i < plane.size(); ++i) {
    px[i] = static_cast<unsigned char>(
        std::lround(255.0 * (plane.re()[i] - lo) / span));
  }
  write_png(path, px, plane.rows(), plane.cols(), false);
}

}  // namespace ptycho
