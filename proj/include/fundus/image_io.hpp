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

// PNG/JPEG raster I/O backed by OpenCV's codecs. Link against
// opencv_imgcodecs (the fundus::image_io CMake target does this).

#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "fundus/error.hpp"
#include "fundus/image.hpp"

namespace fundus {

/// Reads an 8-bit raster as a 3-channel RGB Byte255 image.
inline ImageBuffer read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(Errc::Io, "image not found: " + path.string());
  }
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(Errc::Io, "cannot decode image: " + path.string());
  if (bgr.depth() != CV_8U) bgr.convertTo(bgr, CV_8U);
  const auto w = static_cast<std::size_t>(bgr.cols);
  const auto h = static_cast<std::size_t>(bgr.rows);
  std::vector<float> data(w * h * 3);
  for (std::size_t y = 0; y < h; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) data[(y * w + x) * 3 + c] = row[x][2 - c];
    }
  }
  return ImageBuffer(w, h, 3, RangeTag::Byte255, std::move(data));
}

/// Writes a Byte255 image (1 or 3 channels) in the format implied by the
/// file extension.
inline void write_image(const std::filesystem::path& path, const ImageBuffer& img) {
  require_range(img, RangeTag::Byte255, "write_image");
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(Errc::InvalidImage, "write_image: need 1 or 3 channels");
  }
  const int type = img.channels() == 3 ? CV_8UC3 : CV_8UC1;
  cv::Mat mat(static_cast<int>(img.height()), static_cast<int>(img.width()), type);
  for (std::size_t y = 0; y < img.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(static_cast<int>(y));
    for (std::size_t x = 0; x < img.width(); ++x) {
      for (std::size_t c = 0; c < img.channels(); ++c) {
        const std::size_t dst_c = img.channels() == 3 ? 2 - c : 0;
        row[x * img.channels() + dst_c] = static_cast<std::uint8_t>(img.at(x, y, c));
      }
    }
  }
  if (!cv::imwrite(path.string(), mat)) {
    throw Error(Errc::Io, "cannot write image: " + path.string());
  }
}

}  // namespace fundus
