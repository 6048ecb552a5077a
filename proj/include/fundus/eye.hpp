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

#include <optional>
#include <string_view>

namespace fundus {

/// Which image a prediction or score refers to. Fused marks the average of
/// both eyes.
enum class Eye { Left, Right, Fused };

constexpr std::string_view to_string(Eye e) {
  switch (e) {
    case Eye::Left: return "L";
    case Eye::Right: return "R";
    case Eye::Fused: return "FUSED";
  }
  return "?";
}

inline std::optional<Eye> parse_eye(std::string_view s) {
  if (s == "L") return Eye::Left;
  if (s == "R") return Eye::Right;
  if (s == "FUSED") return Eye::Fused;
  return std::nullopt;
}

}  // namespace fundus
