// Copyright 2026 The Fundus Toolkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Fundus image transforms: circular-mask detection, square crop + resize,
// blur-subtraction contrast enhancement, [-1, 1] normalization and
// training-time augmentation. Everything here is a pure function of its
// arguments.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fundus/error.hpp"
#include "fundus/image.hpp"
#include "fundus/parallel.hpp"
#include "fundus/random.hpp"

namespace fundus {

inline constexpr int kDefaultMaskThreshold = 10;
inline constexpr std::size_t kDefaultTargetSize = 587;

/// Inclusive pixel bounding box of the fundus foreground.
struct MaskBounds {
  std::size_t x_min = 0;
  std::size_t x_max = 0;
  std::size_t y_min = 0;
  std::size_t y_max = 0;

  std::size_t width() const { return x_max - x_min + 1; }
  std::size_t height() const { return y_max - y_min + 1; }

  friend bool operator==(const MaskBounds&, const MaskBounds&) = default;
};

/// Weights for out = alpha * img + beta * blur(img) + gamma.
struct EnhanceParams {
  double alpha = 4.0;
  double beta = -4.0;
  double gamma = 128.0;
  /// Blur sigma as a fraction of the image width.
  double sigma_fraction = 1.0 / 30.0;
};

namespace detail {

inline float round_byte(double v) {
  return static_cast<float>(std::floor(std::clamp(v, 0.0, 255.0) + 0.5));
}

inline double channel_mean(const ImageBuffer& img, std::size_t x,
                           std::size_t y) {
  double sum = 0.0;
  for (std::size_t c = 0; c < img.channels(); ++c) sum += img.at(x, y, c);
  return sum / static_cast<double>(img.channels());
}

inline std::optional<MaskBounds> foreground_bounds(const ImageBuffer& img,
                                                   double threshold) {
  bool found = false;
  MaskBounds b{img.width(), 0, img.height(), 0};
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      if (channel_mean(img, x, y) > threshold) {
        found = true;
        b.x_min = std::min(b.x_min, x);
        b.x_max = std::max(b.x_max, x);
        b.y_min = std::min(b.y_min, y);
        b.y_max = std::max(b.y_max, y);
      }
    }
  }
  if (!found) return std::nullopt;
  return b;
}

}  // namespace detail

/// Tight bounding box of the pixels whose channel mean exceeds `threshold`.
/// Throws Errc::NoMaskFound when no pixel does.
inline MaskBounds detect_mask(const ImageBuffer& img,
                              int threshold = kDefaultMaskThreshold) {
  require_range(img, RangeTag::Byte255, "detect_mask");
  auto bounds = detail::foreground_bounds(img, threshold);
  if (!bounds) {
    throw Error(Errc::NoMaskFound, "no pixel brighter than threshold " +
                                       std::to_string(threshold));
  }
  return *bounds;
}

/// Crops the smallest square that contains `bounds` (centred on it, black
/// where it leaves the frame) and bilinearly resizes it to target x target.
inline ImageBuffer crop_resize(const ImageBuffer& img, const MaskBounds& bounds,
                               std::size_t target = kDefaultTargetSize) {
  require_range(img, RangeTag::Byte255, "crop_resize");
  if (bounds.x_min > bounds.x_max || bounds.y_min > bounds.y_max ||
      bounds.x_max >= img.width() || bounds.y_max >= img.height()) {
    throw Error(Errc::InvalidImage, "crop_resize: bounds outside image");
  }
  if (target == 0) {
    throw Error(Errc::InvalidImage, "crop_resize: target size must be positive");
  }
  const auto side = static_cast<std::ptrdiff_t>(
      std::max(bounds.width(), bounds.height()));
  const std::ptrdiff_t x0 =
      static_cast<std::ptrdiff_t>(bounds.x_min) -
      (side - static_cast<std::ptrdiff_t>(bounds.width())) / 2;
  const std::ptrdiff_t y0 =
      static_cast<std::ptrdiff_t>(bounds.y_min) -
      (side - static_cast<std::ptrdiff_t>(bounds.height())) / 2;

  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  auto sample = [&](std::ptrdiff_t sx, std::ptrdiff_t sy,
                    std::size_t c) -> double {
    const std::ptrdiff_t x = x0 + sx;
    const std::ptrdiff_t y = y0 + sy;
    if (x < 0 || y < 0 || x >= w || y >= h) return 0.0;
    return img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c);
  };

  ImageBuffer out(target, target, img.channels(), RangeTag::Byte255);
  const double scale = static_cast<double>(side) / static_cast<double>(target);
  const double max_coord = static_cast<double>(side - 1);

  // Source coordinates are computed per axis once.
  struct Tap {
    std::ptrdiff_t i0, i1;
    double t;
  };
  std::vector<Tap> taps(target);
  for (std::size_t d = 0; d < target; ++d) {
    double s = (static_cast<double>(d) + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, max_coord);
    const auto i0 = static_cast<std::ptrdiff_t>(std::floor(s));
    const auto i1 = std::min<std::ptrdiff_t>(i0 + 1, side - 1);
    taps[d] = {i0, i1, s - static_cast<double>(i0)};
  }

  for (std::size_t dy = 0; dy < target; ++dy) {
    const Tap& ty = taps[dy];
    for (std::size_t dx = 0; dx < target; ++dx) {
      const Tap& tx = taps[dx];
      for (std::size_t c = 0; c < img.channels(); ++c) {
        const double top = (1.0 - tx.t) * sample(tx.i0, ty.i0, c) +
                           tx.t * sample(tx.i1, ty.i0, c);
        const double bottom = (1.0 - tx.t) * sample(tx.i0, ty.i1, c) +
                              tx.t * sample(tx.i1, ty.i1, c);
        out.at(dx, dy, c) = detail::round_byte((1.0 - ty.t) * top + ty.t * bottom);
      }
    }
  }
  return out;
}

/// Reflect-101 border index: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  i %= period;
  if (i < 0) i += period;
  if (i >= static_cast<std::ptrdiff_t>(n)) i = period - i;
  return static_cast<std::size_t>(i);
}

/// Normalized 1-D Gaussian taps covering +-ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(Errc::InvalidImage, "gaussian_kernel: sigma must be positive");
  }
  const auto radius =
      std::max<std::ptrdiff_t>(1, static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (double& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur of one plane (row-major, width x height) with
/// reflect-101 borders.
inline std::vector<double> gaussian_blur(std::span<const double> plane,
                                         std::size_t width, std::size_t height,
                                         double sigma) {
  if (plane.size() != width * height) {
    throw Error(Errc::InvalidImage, "gaussian_blur: plane size mismatch");
  }
  const auto kernel = gaussian_kernel(sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);

  std::vector<double> tmp(plane.size());
  std::vector<std::size_t> xi(width + 2 * static_cast<std::size_t>(radius));
  for (std::ptrdiff_t i = -radius; i < static_cast<std::ptrdiff_t>(width) + radius; ++i) {
    xi[static_cast<std::size_t>(i + radius)] = reflect_index(i, width);
  }
  for (std::size_t y = 0; y < height; ++y) {
    const double* row = plane.data() + y * width;
    for (std::size_t x = 0; x < width; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel.size(); ++k) {
        acc += kernel[k] * row[xi[x + k]];
      }
      tmp[y * width + x] = acc;
    }
  }

  std::vector<double> out(plane.size());
  std::vector<double> acc(width);
  for (std::size_t y = 0; y < height; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t k = 0; k < kernel.size(); ++k) {
      const std::size_t sy = reflect_index(
          static_cast<std::ptrdiff_t>(y) + static_cast<std::ptrdiff_t>(k) - radius,
          height);
      const double* row = tmp.data() + sy * width;
      const double w = kernel[k];
      for (std::size_t x = 0; x < width; ++x) acc[x] += w * row[x];
    }
    std::copy(acc.begin(), acc.end(), out.begin() + static_cast<std::ptrdiff_t>(y * width));
  }
  return out;
}

/// Blur-subtraction contrast enhancement, clipped and rounded to bytes.
/// Pixels outside the fundus circle (fitted to the thresholded foreground's
/// bounding box) are set to `gamma`.
inline ImageBuffer graham_enhance(const ImageBuffer& img,
                                  const EnhanceParams& p = {},
                                  int mask_threshold = kDefaultMaskThreshold) {
  require_range(img, RangeTag::Byte255, "graham_enhance");
  if (!(p.sigma_fraction > 0.0)) {
    throw Error(Errc::InvalidImage, "graham_enhance: sigma_fraction must be positive");
  }
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const std::size_t nc = img.channels();
  const double sigma = p.sigma_fraction * static_cast<double>(w);
  const float background = detail::round_byte(p.gamma);

  ImageBuffer out(w, h, nc, RangeTag::Byte255, background);
  const auto bounds = detail::foreground_bounds(img, mask_threshold);
  if (!bounds) return out;

  const double cx = 0.5 * static_cast<double>(bounds->x_min + bounds->x_max);
  const double cy = 0.5 * static_cast<double>(bounds->y_min + bounds->y_max);
  const double r = 0.5 * static_cast<double>(std::max(bounds->width(), bounds->height()));
  auto inside = [&](std::size_t x, std::size_t y) {
    const double dx = static_cast<double>(x) - cx;
    const double dy = static_cast<double>(y) - cy;
    return dx * dx + dy * dy <= r * r;
  };

  std::vector<double> plane(w * h);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < w * h; ++i) plane[i] = img.data()[i * nc + c];
    const auto blurred = gaussian_blur(plane, w, h, sigma);
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        if (!inside(x, y)) continue;
        const std::size_t i = y * w + x;
        out.at(x, y, c) =
            detail::round_byte(p.alpha * plane[i] + p.beta * blurred[i] + p.gamma);
      }
    }
  }
  return out;
}

/// Maps [0, 255] onto [-1, 1] via v / 127.5 - 1.
inline ImageBuffer normalize(const ImageBuffer& img) {
  require_range(img, RangeTag::Byte255, "normalize");
  std::vector<float> data(img.data().size());
  std::transform(img.data().begin(), img.data().end(), data.begin(), [](float v) {
    return static_cast<float>(std::clamp(static_cast<double>(v) / 127.5 - 1.0, -1.0, 1.0));
  });
  return ImageBuffer(img.width(), img.height(), img.channels(), RangeTag::Unit,
                     std::move(data));
}

// Augmentation --------------------------------------------------------------

struct AugmentSpec {
  double rotation_min_degrees = -15.0;
  double rotation_max_degrees = 15.0;
  double flip_horizontal_probability = 0.5;
  double flip_vertical_probability = 0.5;
  std::uint64_t seed = 0;
};

/// One concrete realization of an AugmentSpec.
struct AugmentDraw {
  double rotation_degrees = 0.0;
  bool flip_horizontal = false;
  bool flip_vertical = false;
};

inline AugmentDraw sample_augment(const AugmentSpec& spec) {
  Rng rng(spec.seed);
  AugmentDraw d;
  d.rotation_degrees = rng.uniform(spec.rotation_min_degrees, spec.rotation_max_degrees);
  d.flip_horizontal = rng.bernoulli(spec.flip_horizontal_probability);
  d.flip_vertical = rng.bernoulli(spec.flip_vertical_probability);
  return d;
}

inline ImageBuffer flip_horizontal(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t c = 0; c < img.channels(); ++c)
        out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
  return out;
}

inline ImageBuffer flip_vertical(const ImageBuffer& img) {
  ImageBuffer out = img;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x)
      for (std::size_t c = 0; c < img.channels(); ++c)
        out.at(x, img.height() - 1 - y, c) = img.at(x, y, c);
  return out;
}

/// Bilinear rotation about the image centre; uncovered pixels become black
/// for the image's range.
inline ImageBuffer rotate(const ImageBuffer& img, double degrees) {
  if (degrees == 0.0) return img;
  const float fill = img.range() == RangeTag::Byte255 ? 0.0f : -1.0f;
  ImageBuffer out(img.width(), img.height(), img.channels(), img.range(), fill);
  const double rad = degrees * 3.14159265358979323846 / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  const double cx = 0.5 * static_cast<double>(img.width() - 1);
  const double cy = 0.5 * static_cast<double>(img.height() - 1);
  const auto w = static_cast<std::ptrdiff_t>(img.width());
  const auto h = static_cast<std::ptrdiff_t>(img.height());
  auto px = [&](std::ptrdiff_t x, std::ptrdiff_t y, std::size_t c) -> double {
    if (x < 0 || y < 0 || x >= w || y >= h) return fill;
    return img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c);
  };
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      // Inverse mapping: destination -> source.
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double sx = cs * dx + sn * dy + cx;
      const double sy = -sn * dx + cs * dy + cy;
      if (sx <= -1.0 || sy <= -1.0 || sx >= static_cast<double>(w) ||
          sy >= static_cast<double>(h)) {
        continue;
      }
      const auto x0 = static_cast<std::ptrdiff_t>(std::floor(sx));
      const auto y0 = static_cast<std::ptrdiff_t>(std::floor(sy));
      const double tx = sx - static_cast<double>(x0);
      const double ty = sy - static_cast<double>(y0);
      for (std::size_t c = 0; c < img.channels(); ++c) {
        const double v = (1 - ty) * ((1 - tx) * px(x0, y0, c) + tx * px(x0 + 1, y0, c)) +
                         ty * ((1 - tx) * px(x0, y0 + 1, c) + tx * px(x0 + 1, y0 + 1, c));
        out.at(x, y, c) = img.range() == RangeTag::Byte255
                              ? detail::round_byte(v)
                              : static_cast<float>(std::clamp(v, -1.0, 1.0));
      }
    }
  }
  return out;
}

/// Rotation first, then flips. Shape and range tag are preserved.
inline ImageBuffer apply_augment(const ImageBuffer& img, const AugmentDraw& draw) {
  ImageBuffer out = rotate(img, draw.rotation_degrees);
  if (draw.flip_horizontal) out = flip_horizontal(out);
  if (draw.flip_vertical) out = flip_vertical(out);
  return out;
}

inline ImageBuffer augment(const ImageBuffer& img, const AugmentSpec& spec) {
  return apply_augment(img, sample_augment(spec));
}

// Full pipeline -------------------------------------------------------------

struct PreprocessConfig {
  int mask_threshold = kDefaultMaskThreshold;
  std::size_t target = kDefaultTargetSize;
  EnhanceParams enhance{};
  bool enhance_enabled = true;
};

/// detect_mask -> crop_resize -> optional graham_enhance, still in bytes.
inline ImageBuffer preprocess_bytes(const ImageBuffer& img,
                                    const PreprocessConfig& cfg = {}) {
  const MaskBounds bounds = detect_mask(img, cfg.mask_threshold);
  ImageBuffer cropped = crop_resize(img, bounds, cfg.target);
  if (!cfg.enhance_enabled) return cropped;
  return graham_enhance(cropped, cfg.enhance, cfg.mask_threshold);
}

inline ImageBuffer preprocess(const ImageBuffer& img,
                              const PreprocessConfig& cfg = {}) {
  return normalize(preprocess_bytes(img, cfg));
}

/// Outcome of one batch item: either an image or the error that stopped it.
struct BatchResult {
  std::optional<ImageBuffer> image;
  std::optional<Errc> error;
  std::string message;
};

/// Preprocesses every input on up to `jobs` threads. Per-item failures are
/// captured in the result rather than thrown; output order matches input.
inline std::vector<BatchResult> preprocess_batch(std::span<const ImageBuffer> inputs,
                                                 const PreprocessConfig& cfg,
                                                 std::size_t jobs) {
  std::vector<BatchResult> results(inputs.size());
  parallel_for(inputs.size(), jobs, [&](std::size_t i) {
    try {
      results[i].image = preprocess(inputs[i], cfg);
    } catch (const Error& e) {
      results[i].error = e.code();
      results[i].message = e.what();
    }
  });
  return results;
}

}  // namespace fundus
