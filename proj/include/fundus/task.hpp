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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace fundus {

/// Prediction targets. Classification tasks carry probabilities in [0, 1];
/// regression tasks carry values in physical units.
enum class Task { Age, Sex, Smoking, Bmi, Sbp, Dbp, Hba1c, Cholesterol, Quality };

inline constexpr std::array<Task, 8> kRiskFactorTasks{
    Task::Age, Task::Sex, Task::Smoking, Task::Bmi,
    Task::Sbp, Task::Dbp, Task::Hba1c,   Task::Cholesterol};

constexpr std::string_view to_string(Task t) {
  switch (t) {
    case Task::Age: return "age";
    case Task::Sex: return "sex";
    case Task::Smoking: return "smoking";
    case Task::Bmi: return "bmi";
    case Task::Sbp: return "sbp";
    case Task::Dbp: return "dbp";
    case Task::Hba1c: return "hba1c";
    case Task::Cholesterol: return "cholesterol";
    case Task::Quality: return "quality";
  }
  return "?";
}

inline std::optional<Task> parse_task(std::string_view s) {
  for (Task t : {Task::Age, Task::Sex, Task::Smoking, Task::Bmi, Task::Sbp,
                 Task::Dbp, Task::Hba1c, Task::Cholesterol, Task::Quality}) {
    if (s == to_string(t)) return t;
  }
  return std::nullopt;
}

constexpr bool is_classification(Task t) {
  return t == Task::Sex || t == Task::Smoking || t == Task::Quality;
}

}  // namespace fundus
