#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "archive_lens/error.hpp"

namespace archive_lens {

struct GrayscaleImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, one byte per pixel
};

struct ColorImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major interleaved R, G, B

  std::size_t pixel_count() const { return width * height; }
};

struct Hsv {
  double h;  // degrees in [0, 360)
  double s;  // [0, 1]
  double v;  // [0, 255]
};

inline Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8, g = g8, b = b8;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, mx > 0.0 ? delta / mx : 0.0, mx};
  if (delta > 0.0) {
    double h;
    if (mx == r) {
      h = std::fmod((g - b) / delta, 6.0);
    } else if (mx == g) {
      h = (b - r) / delta + 2.0;
    } else {
      h = (r - g) / delta + 4.0;
    }
    h *= 60.0;
    if (h < 0.0) h += 360.0;
    out.h = h;
  }
  return out;
}

inline std::array<std::uint8_t, 3> hsv_to_rgb(const Hsv& c) {
  const double chroma = c.v * c.s;
  const double hp = c.h / 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1.0) {
    r = chroma; g = x;
  } else if (hp < 2.0) {
    r = x; g = chroma;
  } else if (hp < 3.0) {
    g = chroma; b = x;
  } else if (hp < 4.0) {
    g = x; b = chroma;
  } else if (hp < 5.0) {
    r = x; b = chroma;
  } else {
    r = chroma; b = x;
  }
  const double m = c.v - chroma;
  auto to8 = [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  };
  return {to8(r + m), to8(g + m), to8(b + m)};
}

// Lookup table mapping each value level through the classic CDF remap
// v' = round(255 * (cdf(v) - cdf_min) / (N - cdf_min)). When every pixel
// shares one level the denominator vanishes and everything maps to 0.
inline std::array<std::uint8_t, 256> equalization_table(const std::array<std::uint64_t, 256>& hist) {
  std::uint64_t total = 0;
  for (auto c : hist) total += c;
  if (total == 0) throw InvalidInput("histogram equalization of an empty image");
  std::array<std::uint8_t, 256> lut{};
  std::uint64_t cdf = 0, cdf_min = 0;
  for (std::size_t v = 0; v < 256; ++v) {
    cdf += hist[v];
    if (cdf_min == 0 && cdf > 0) cdf_min = cdf;
    if (total == cdf_min || cdf == 0) {
      lut[v] = 0;
      continue;
    }
    const double scaled = 255.0 * static_cast<double>(cdf - cdf_min) /
                          static_cast<double>(total - cdf_min);
    lut[v] = static_cast<std::uint8_t>(std::lround(scaled));
  }
  return lut;
}

inline GrayscaleImage hist_equalize(const GrayscaleImage& img) {
  if (img.width * img.height == 0 || img.pixels.size() != img.width * img.height) {
    throw InvalidInput("histogram equalization needs a non-empty image");
  }
  std::array<std::uint64_t, 256> hist{};
  for (auto p : img.pixels) ++hist[p];
  const auto lut = equalization_table(hist);
  GrayscaleImage out = img;
  for (auto& p : out.pixels) p = lut[p];
  return out;
}

// Equalizes the V channel in HSV space; hue and saturation are kept.
inline ColorImage hist_equalize(const ColorImage& img) {
  const std::size_t n = img.pixel_count();
  if (n == 0 || img.rgb.size() != 3 * n) {
    throw InvalidInput("histogram equalization needs a non-empty image");
  }
  std::vector<Hsv> hsv(n);
  std::array<std::uint64_t, 256> hist{};
  for (std::size_t i = 0; i < n; ++i) {
    hsv[i] = rgb_to_hsv(img.rgb[3 * i], img.rgb[3 * i + 1], img.rgb[3 * i + 2]);
    ++hist[static_cast<std::size_t>(hsv[i].v)];
  }
  const auto lut = equalization_table(hist);
  ColorImage out = img;
  for (std::size_t i = 0; i < n; ++i) {
    Hsv c = hsv[i];
    c.v = lut[static_cast<std::size_t>(c.v)];
    const auto rgb = hsv_to_rgb(c);
    std::copy(rgb.begin(), rgb.end(), out.rgb.begin() + static_cast<std::ptrdiff_t>(3 * i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary PNM (P5 grayscale, P6 color) with maxval 255.
// ---------------------------------------------------------------------------

namespace detail {

inline std::size_t pnm_field(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    try {
      return static_cast<std::size_t>(std::stoul(tok));
    } catch (const std::exception&) {
      break;
    }
  }
  throw InvalidInput("malformed PNM header");
}

}  // namespace detail

// Reads P5 or P6; grayscale input is expanded to three equal channels.
inline ColorImage read_pnm(std::istream& in) {
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P6") throw InvalidInput("unsupported image format '" + magic + "'");
  ColorImage img;
  img.width = detail::pnm_field(in);
  img.height = detail::pnm_field(in);
  const std::size_t maxval = detail::pnm_field(in);
  if (maxval != 255) throw InvalidInput("only 8-bit PNM images are supported");
  in.get();  // single whitespace before raster
  const std::size_t n = img.width * img.height;
  const std::size_t channels = magic == "P6" ? 3 : 1;
  std::vector<std::uint8_t> raw(n * channels);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) throw InvalidInput("truncated PNM raster");
  if (channels == 3) {
    img.rgb = std::move(raw);
  } else {
    img.rgb.resize(3 * n);
    for (std::size_t i = 0; i < n; ++i) img.rgb[3 * i] = img.rgb[3 * i + 1] = img.rgb[3 * i + 2] = raw[i];
  }
  return img;
}

inline ColorImage read_pnm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open image '" + path + "'");
  return read_pnm(in);
}

inline void write_ppm(std::ostream& out, const ColorImage& img) {
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

inline void write_ppm(const std::string& path, const ColorImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write image '" + path + "'");
  write_ppm(out, img);
}

}  // namespace archive_lens
