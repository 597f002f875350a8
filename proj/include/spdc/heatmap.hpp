#pragma once

// Heatmap of Re rho on the wavelength grid, PNG I/O and a structural
// similarity score for golden-image comparisons.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <png.h>

#include "spdc/density.hpp"
#include "spdc/error.hpp"

namespace spdc {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  ///< row-major, 3 bytes per pixel

  Image() = default;
  Image(int w, int h, std::uint8_t fill = 255)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    rgb[i] = c[0];
    rgb[i + 1] = c[1];
    rgb[i + 2] = c[2];
  }

  std::array<std::uint8_t, 3> at(int x, int y) const {
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
};

/// Blue (-1) through white (0) to red (+1).
inline std::array<std::uint8_t, 3> diverging_color(double t) {
  t = std::clamp(t, -1.0, 1.0);
  static constexpr double neg[3] = {59, 76, 192};
  static constexpr double mid[3] = {247, 247, 247};
  static constexpr double pos[3] = {180, 4, 38};
  const double* end = t < 0 ? neg : pos;
  const double s = std::abs(t);
  std::array<std::uint8_t, 3> c{};
  for (int i = 0; i < 3; ++i)
    c[i] = static_cast<std::uint8_t>(std::lround(mid[i] + s * (end[i] - mid[i])));
  return c;
}

namespace detail {

// 3x5 glyphs, one row per entry, bit 2 = leftmost column.
inline const std::array<std::uint8_t, 5>* glyph(char ch) {
  static const std::array<std::uint8_t, 5> digits[10] = {
      {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
      {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7}};
  static const std::array<std::uint8_t, 5> minus{0, 0, 7, 0, 0};
  static const std::array<std::uint8_t, 5> dot{0, 0, 0, 0, 2};
  static const std::array<std::uint8_t, 5> n{0, 6, 5, 5, 5};
  static const std::array<std::uint8_t, 5> m{0, 7, 7, 5, 5};
  if (ch >= '0' && ch <= '9') return &digits[ch - '0'];
  switch (ch) {
    case '-': return &minus;
    case '.': return &dot;
    case 'n': return &n;
    case 'm': return &m;
    default: return nullptr;
  }
}

inline int text_width(const std::string& s, int scale) {
  return s.empty() ? 0 : static_cast<int>(s.size()) * 4 * scale - scale;
}

inline void draw_text(Image& img, int x, int y, const std::string& s, int scale,
                      std::array<std::uint8_t, 3> color = {0, 0, 0}) {
  for (char ch : s) {
    if (const auto* g = glyph(ch)) {
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if ((*g)[row] & (4 >> col))
            for (int dy = 0; dy < scale; ++dy)
              for (int dx = 0; dx < scale; ++dx)
                img.set(x + col * scale + dx, y + row * scale + dy, color);
    }
    x += 4 * scale;
  }
}

inline double nice_step(double span) {
  const double raw = span / 5.0;
  const double p = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= raw) return m * p;
  return 10.0 * p;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace detail

struct HeatmapOptions {
  int plot_size = 384;  ///< pixels per axis of the matrix area
  int font_scale = 2;
};

/// Re rho with a symmetric color scale around zero; wavelength increases to
/// the right (lambda) and upwards (lambda').
inline Image render_heatmap(const DensityMatrix& rho, const HeatmapOptions& opt = {}) {
  const int n = rho.size();
  if (n < 2) throw ContractViolation("heatmap needs at least a 2 x 2 matrix");
  const int fs = opt.font_scale;
  const int left = 10 * fs * 4 / 2 + 12;
  const int bottom = 5 * fs + 5 * fs + 20;
  const int top = 10, right = 10 + 16 + 8 + 6 * fs * 4;
  const int p = opt.plot_size;
  Image img(left + p + right, top + p + bottom);

  const Eigen::MatrixXd re = rho.values.real();
  const double scale = std::max(re.cwiseAbs().maxCoeff(), 1e-300);
  const double lo = rho.wavelength_nm(0), hi = rho.wavelength_nm(n - 1);

  for (int py = 0; py < p; ++py) {
    const double v = (p - 1 - py) * (n - 1.0) / (p - 1);
    const int k0 = std::min(static_cast<int>(v), n - 2);
    const double fv = v - k0;
    for (int px = 0; px < p; ++px) {
      const double u = px * (n - 1.0) / (p - 1);
      const int j0 = std::min(static_cast<int>(u), n - 2);
      const double fu = u - j0;
      const double val = (1 - fu) * (1 - fv) * re(j0, k0) + fu * (1 - fv) * re(j0 + 1, k0) +
                         (1 - fu) * fv * re(j0, k0 + 1) + fu * fv * re(j0 + 1, k0 + 1);
      img.set(left + px, top + py, diverging_color(val / scale));
    }
  }

  const std::array<std::uint8_t, 3> black{0, 0, 0};
  for (int i = -1; i <= p; ++i) {
    img.set(left + i, top - 1, black);
    img.set(left + i, top + p, black);
    img.set(left - 1, top + i, black);
    img.set(left + p, top + i, black);
  }

  const double step = detail::nice_step(hi - lo);
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) {
    const double f = (t - lo) / (hi - lo);
    const int px = left + static_cast<int>(std::lround(f * (p - 1)));
    const int py = top + p - 1 - static_cast<int>(std::lround(f * (p - 1)));
    for (int d = 1; d <= 5; ++d) {
      img.set(px, top + p + d, black);
      img.set(left - 1 - d, py, black);
    }
    const std::string label = detail::tick_label(t);
    detail::draw_text(img, px - detail::text_width(label, fs) / 2, top + p + 8, label, fs);
    detail::draw_text(img, left - 8 - detail::text_width(label, fs), py - 5 * fs / 2, label, fs);
  }
  detail::draw_text(img, left + p / 2 - detail::text_width("nm", fs) / 2,
                    top + p + 8 + 5 * fs + 6, "nm", fs);

  // Color bar, +max at the top.
  const int bx = left + p + 10;
  for (int py = 0; py < p; ++py) {
    const auto c = diverging_color(1.0 - 2.0 * py / (p - 1));
    for (int dx = 0; dx < 16; ++dx) img.set(bx + dx, top + py, c);
  }
  detail::draw_text(img, bx + 20, top, "1", fs);
  detail::draw_text(img, bx + 20, top + p / 2 - 5 * fs / 2, "0", fs);
  detail::draw_text(img, bx + 20, top + p - 5 * fs, "-1", fs);
  return img;
}

inline void write_png(const std::string& path, const Image& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.rgb.data(), 0, nullptr)) {
    throw ConfigError("out", "cannot write PNG " + path + ": " + image.message);
  }
}

inline Image read_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw ConfigError("png", "cannot read " + path + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  Image img(static_cast<int>(image.width), static_cast<int>(image.height));
  if (!png_image_finish_read(&image, nullptr, img.rgb.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ConfigError("png", "cannot decode " + path + ": " + image.message);
  }
  return img;
}

/// Mean structural similarity over 8 x 8 windows (stride 4), averaged over
/// the R, G and B channels. 1 for identical images.
inline double structural_similarity(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw ContractViolation("structural_similarity: image sizes differ");
  constexpr double c1 = (0.01 * 255) * (0.01 * 255);
  constexpr double c2 = (0.03 * 255) * (0.03 * 255);
  constexpr int win = 8, stride = 4;
  auto px = [](const Image& img, int x, int y, int c) -> double {
    return img.rgb[(static_cast<std::size_t>(y) * img.width + x) * 3 + c];
  };
  double total = 0.0;
  int windows = 0;
  for (int c = 0; c < 3; ++c) {
    for (int y0 = 0; y0 + win <= a.height; y0 += stride) {
      for (int x0 = 0; x0 + win <= a.width; x0 += stride) {
        double ma = 0, mb = 0;
        for (int y = y0; y < y0 + win; ++y)
          for (int x = x0; x < x0 + win; ++x) {
            ma += px(a, x, y, c);
            mb += px(b, x, y, c);
          }
        ma /= win * win;
        mb /= win * win;
        double va = 0, vb = 0, cov = 0;
        for (int y = y0; y < y0 + win; ++y)
          for (int x = x0; x < x0 + win; ++x) {
            const double da = px(a, x, y, c) - ma;
            const double db = px(b, x, y, c) - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
          }
        va /= win * win - 1;
        vb /= win * win - 1;
        cov /= win * win - 1;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (va + vb + c2));
        ++windows;
      }
    }
  }
  return windows ? total / windows : 1.0;
}

}  // namespace spdc
