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

// Synthetic stand-ins for fundus photographs, participant manifests, quality
// scores and model predictions, for demos and tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fundus/dataset.hpp"
#include "fundus/eye.hpp"
#include "fundus/fusion.hpp"
#include "fundus/image.hpp"
#include "fundus/quality.hpp"
#include "fundus/random.hpp"
#include "fundus/task.hpp"

namespace fundus {

/// Black frame with a filled disk of the given value: (x - cx)^2 + (y - cy)^2
/// <= radius^2 lights up. The tight bounding box is therefore
/// [cx - floor(r), cx + floor(r)] for integer centres.
inline ImageBuffer make_disk_image(std::size_t width, std::size_t height, double cx, double cy,
                                   double radius, float value = 255.0f,
                                   std::size_t channels = 3) {
  ImageBuffer img(width, height, channels, RangeTag::Byte255, 0.0f);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      if (dx * dx + dy * dy <= radius * radius) {
        for (std::size_t c = 0; c < channels; ++c) img.at(x, y, c) = value;
      }
    }
  }
  return img;
}

/// Fundus-like RGB picture: a reddish disk with radial fall-off, a brighter
/// optic-disc blob, a few dark vessel arcs and pixel noise, on black. The
/// frame is wider than tall so the disk is off-square.
inline ImageBuffer make_fundus_like(std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t width = size + size / 4;
  const std::size_t height = size;
  const double cx = 0.5 * static_cast<double>(width) + rng.uniform(-0.03, 0.03) * static_cast<double>(size);
  const double cy = 0.5 * static_cast<double>(height) + rng.uniform(-0.03, 0.03) * static_cast<double>(size);
  const double radius = 0.42 * static_cast<double>(size);
  const double disc_x = cx + (rng.bernoulli(0.5) ? 0.45 : -0.45) * radius;
  const double disc_y = cy + rng.uniform(-0.1, 0.1) * radius;
  const double brightness = rng.uniform(0.75, 1.1);

  struct Vessel {
    double phase, freq, amp;
  };
  std::vector<Vessel> vessels;
  for (int i = 0; i < 5; ++i) vessels.push_back({rng.uniform(0, 6.283), rng.uniform(2, 5), rng.uniform(0.1, 0.3)});

  ImageBuffer img(width, height, 3, RangeTag::Byte255, 0.0f);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      const double rr = std::sqrt(dx * dx + dy * dy) / radius;
      if (rr > 1.0) continue;
      double shade = brightness * (1.0 - 0.45 * rr * rr);
      const double ddx = static_cast<double>(x) - disc_x;
      const double ddy = static_cast<double>(y) - disc_y;
      shade += 0.6 * std::exp(-(ddx * ddx + ddy * ddy) / (2.0 * 0.01 * radius * radius));
      const double angle = std::atan2(dy, dx);
      for (const auto& v : vessels) {
        const double d = std::abs(rr - 0.5 - v.amp * std::sin(v.freq * angle + v.phase));
        if (d < 0.015) shade *= 0.6;
      }
      const double noise = rng.normal(0.0, 0.02);
      const double r = std::clamp(200.0 * (shade + noise), 0.0, 255.0);
      const double g = std::clamp(95.0 * (shade + noise), 0.0, 255.0);
      const double b = std::clamp(45.0 * (shade + noise), 0.0, 255.0);
      img.at(x, y, 0) = static_cast<float>(std::round(r));
      img.at(x, y, 1) = static_cast<float>(std::round(g));
      img.at(x, y, 2) = static_cast<float>(std::round(b));
    }
  }
  return img;
}

/// Participants with population-like risk-factor distributions. Image refs
/// are `images/<id>_L.png` / `images/<id>_R.png`. Ages fall in [40, 70).
inline std::vector<ParticipantRecord> synth_participants(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ParticipantRecord> out;
  out.reserve(n);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(n).size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string number = std::to_string(i + 1);
    const std::string id = "P" + std::string(width - std::min(width, number.size()), '0') + number;
    ParticipantRecord r;
    r.participant_id = id;
    r.left_image = "images/" + id + "_L.png";
    r.right_image = "images/" + id + "_R.png";
    r.age = std::round(rng.uniform(40.0, 70.0) * 100.0) / 100.0;
    r.sex = rng.bernoulli(0.43) ? Sex::Male : Sex::Female;
    const double u = rng.uniform();
    r.smoking_raw = u < 0.09 ? "current" : u < 0.45 ? "previous" : u < 0.98 ? "never" : "prefer_not_to_answer";
    auto reading = [&](double mean, double sd) { return std::round(rng.normal(mean, sd) * 10.0) / 10.0; };
    r.bmi = {reading(27.1, 4.7)};
    r.sbp = {reading(136.0, 18.0), reading(136.0, 18.0)};
    r.dbp = {reading(81.7, 10.0), reading(81.7, 10.0)};
    if (rng.bernoulli(0.92)) r.hba1c = {reading(35.6, 6.4)};
    if (rng.bernoulli(0.92)) r.cholesterol = {reading(5.7, 1.1)};
    r.ethnicity = rng.bernoulli(0.91) ? (rng.bernoulli(0.9) ? "British" : "Irish") : "Other";
    r.british_irish = *r.ethnicity != "Other";
    out.push_back(std::move(r));
  }
  return out;
}

/// Per-eye quality probabilities; each image is good with the given
/// probability, independently.
inline std::vector<QualityScore> synth_quality_scores(std::span<const ParticipantRecord> records,
                                                      double p_left_good, double p_right_good,
                                                      std::uint64_t seed) {
  Rng rng(seed);
  std::vector<QualityScore> out;
  for (const auto& r : records) {
    for (Eye eye : {Eye::Left, Eye::Right}) {
      const bool present = eye == Eye::Left ? r.left_image.has_value() : r.right_image.has_value();
      const double p = eye == Eye::Left ? p_left_good : p_right_good;
      const bool good = rng.bernoulli(p);
      const double score = good ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.4999);
      if (present) out.push_back({r.participant_id, eye, score});
    }
  }
  return out;
}

/// Typical spread of each risk factor, used to scale synthetic noise.
inline double task_scale(Task t) {
  switch (t) {
    case Task::Age: return 8.2;
    case Task::Bmi: return 4.7;
    case Task::Sbp: return 18.2;
    case Task::Dbp: return 10.0;
    case Task::Hba1c: return 6.4;
    case Task::Cholesterol: return 1.1;
    default: return 1.0;
  }
}

/// Per-eye predictions: regression value = truth + N(0, noise * task_scale)
/// with independent noise per eye; classification probability =
/// logistic(2 * (2y - 1) / noise + N(0, 1)). Participants without a label get
/// a prediction drawn around the population centre. `split_of` supplies the
/// split column.
template <typename SplitOf>
std::vector<PredictionRecord> synth_predictions(std::span<const ParticipantRecord> records,
                                                std::span<const Task> tasks, double noise,
                                                std::uint64_t seed, SplitOf&& split_of) {
  Rng rng(seed);
  std::vector<PredictionRecord> out;
  for (const auto& r : records) {
    for (Task task : tasks) {
      const auto truth = task_truth(r, task);
      for (Eye eye : {Eye::Left, Eye::Right}) {
        double value;
        if (is_classification(task)) {
          const double y = truth.value_or(0.0);
          const double logit = 2.0 * (2.0 * y - 1.0) / std::max(noise, 1e-6) + rng.normal();
          value = 1.0 / (1.0 + std::exp(-logit));
        } else {
          value = truth.value_or(0.0) + rng.normal(0.0, noise * task_scale(task));
        }
        out.push_back({r.participant_id, eye, task, value, "synthetic", split_of(r.participant_id)});
      }
    }
  }
  return out;
}

}  // namespace fundus
