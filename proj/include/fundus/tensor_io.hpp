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

// Flat tensor container for normalized images:
//   bytes 0..3   magic "FPT1"
//   bytes 4..15  height, width, channels as little-endian u32
//   then height*width*channels little-endian IEEE-754 float32, HWC order.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fundus/error.hpp"
#include "fundus/image.hpp"

namespace fundus {

inline constexpr std::array<char, 4> kTensorMagic{'F', 'P', 'T', '1'};
inline constexpr std::size_t kTensorHeaderSize = 16;

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_tensor(const ImageBuffer& img) {
  require_range(img, RangeTag::Unit, "encode_tensor");
  std::vector<std::uint8_t> out;
  out.reserve(kTensorHeaderSize + img.data().size() * 4);
  out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(img.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(img.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(img.channels()));
  for (float v : img.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline ImageBuffer decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kTensorHeaderSize ||
      std::memcmp(bytes.data(), kTensorMagic.data(), kTensorMagic.size()) != 0) {
    throw Error(Errc::BadFormat, "tensor: missing FPT1 header");
  }
  const std::size_t h = detail::get_u32(bytes.data() + 4);
  const std::size_t w = detail::get_u32(bytes.data() + 8);
  const std::size_t c = detail::get_u32(bytes.data() + 12);
  const std::size_t n = h * w * c;
  if (bytes.size() != kTensorHeaderSize + 4 * n) {
    throw Error(Errc::BadFormat, "tensor: payload size does not match header");
  }
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = std::bit_cast<float>(detail::get_u32(bytes.data() + kTensorHeaderSize + 4 * i));
  }
  return ImageBuffer(w, h, c, RangeTag::Unit, std::move(data));
}

inline void write_tensor(const std::filesystem::path& path, const ImageBuffer& img) {
  const auto bytes = encode_tensor(img);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(Errc::Io, "write failed: " + path.string());
}

inline ImageBuffer read_tensor(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return decode_tensor(bytes);
}

}  // namespace fundus
