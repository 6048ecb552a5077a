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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fundus/error.hpp"

namespace fundus {

/// Value range carried by an image. `Byte255` holds integral values in
/// [0, 255]; `Unit` holds values in [-1, 1].
enum class RangeTag { Byte255, Unit };

/// Row-major, channel-interleaved raster (HWC).
class ImageBuffer {
 public:
  ImageBuffer() = default;

  ImageBuffer(std::size_t width, std::size_t height, std::size_t channels,
              RangeTag range, float fill = 0.0f)
      : width_(width),
        height_(height),
        channels_(channels),
        range_(range),
        data_(width * height * channels, fill) {
    if (width == 0 || height == 0 || channels == 0) {
      throw Error(Errc::InvalidImage, "image dimensions must be positive");
    }
  }

  ImageBuffer(std::size_t width, std::size_t height, std::size_t channels,
              RangeTag range, std::vector<float> data)
      : width_(width),
        height_(height),
        channels_(channels),
        range_(range),
        data_(std::move(data)) {
    if (width == 0 || height == 0 || channels == 0) {
      throw Error(Errc::InvalidImage, "image dimensions must be positive");
    }
    if (data_.size() != width * height * channels) {
      throw Error(Errc::InvalidImage,
                  "data length " + std::to_string(data_.size()) +
                      " does not match " + std::to_string(width) + "x" +
                      std::to_string(height) + "x" + std::to_string(channels));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }
  RangeTag range() const noexcept { return range_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  float& at(std::size_t x, std::size_t y, std::size_t c) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  float at(std::size_t x, std::size_t y, std::size_t c) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  /// True when every value respects the range tag.
  bool in_range() const {
    const float lo = range_ == RangeTag::Byte255 ? 0.0f : -1.0f;
    const float hi = range_ == RangeTag::Byte255 ? 255.0f : 1.0f;
    for (float v : data_) {
      if (!(v >= lo && v <= hi)) return false;
    }
    return true;
  }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 0;
  RangeTag range_ = RangeTag::Byte255;
  std::vector<float> data_;
};

inline void require_range(const ImageBuffer& img, RangeTag expected,
                          const char* op) {
  if (img.empty()) {
    throw Error(Errc::InvalidImage, std::string(op) + ": empty image");
  }
  if (img.range() != expected) {
    throw Error(Errc::InvalidImage,
                std::string(op) + ": unexpected range tag");
  }
}

}  // namespace fundus
