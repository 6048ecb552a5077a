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

// Nonparametric percentile bootstrap. Replicate r draws its resample from an
// RNG seeded by (seed, r) alone, so the result is the same for any number of
// worker threads and any scheduling order.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fundus/error.hpp"
#include "fundus/parallel.hpp"
#include "fundus/random.hpp"

namespace fundus {

struct BootstrapConfig {
  std::size_t replicates = 1000;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// Resamples on which the statistic is undefined are redrawn; more than this
  /// fraction of `replicates` redraws is an error.
  double max_redraw_fraction = 0.10;
};

struct BootstrapResult {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
  std::size_t redrawn = 0;
  /// Replicate statistics in replicate order.
  std::vector<double> replicates;
};

/// Index of the order statistic used for quantile q among b sorted values.
inline std::size_t percentile_index(std::size_t b, double q) {
  const double pos = std::round(q * static_cast<double>(b - 1));
  return static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(b - 1)));
}

inline void validate(const BootstrapConfig& cfg) {
  if (cfg.replicates < 1) throw Error(Errc::BadConfig, "bootstrap needs at least one replicate");
  if (!(cfg.level > 0.0 && cfg.level < 1.0)) {
    throw Error(Errc::BadConfig, "bootstrap level must lie in (0, 1)");
  }
}

/// Bootstraps `statistic` over a data set of size n. The statistic receives
/// the resampled row indices (with repetition) and returns a double; it may
/// throw fundus::Error to signal that it is undefined on that resample, which
/// triggers a redraw. Errors on the full data set propagate.
template <typename Statistic>
BootstrapResult bootstrap_ci(std::size_t n, Statistic&& statistic, const BootstrapConfig& cfg) {
  validate(cfg);
  if (n == 0) throw Error(Errc::Empty, "bootstrap: empty data set");

  BootstrapResult res;
  res.n = n;
  {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    res.estimate = statistic(std::span<const std::size_t>(all));
  }

  const std::size_t b = cfg.replicates;
  const auto redraw_limit =
      static_cast<std::size_t>(std::floor(cfg.max_redraw_fraction * static_cast<double>(b)));
  res.replicates.assign(b, 0.0);
  std::vector<std::size_t> redraws(b, 0);
  std::vector<char> failed(b, 0);

  parallel_for(b, cfg.jobs, [&](std::size_t r) {
    Rng rng(derive_seed(cfg.seed, r));
    std::vector<std::size_t> sample(n);
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt > redraw_limit) {
        failed[r] = 1;
        return;
      }
      for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
      try {
        res.replicates[r] = statistic(std::span<const std::size_t>(sample));
        redraws[r] = attempt;
        return;
      } catch (const Error&) {
      }
    }
  });

  for (std::size_t r = 0; r < b; ++r) res.redrawn += redraws[r] + (failed[r] ? redraw_limit + 1 : 0);
  if (res.redrawn > redraw_limit) {
    throw Error(Errc::TooManyDegenerateResamples,
                std::to_string(res.redrawn) + " of " + std::to_string(b) +
                    " resamples had to be redrawn");
  }

  std::vector<double> sorted = res.replicates;
  std::sort(sorted.begin(), sorted.end());
  const double tail = 0.5 * (1.0 - cfg.level);
  res.ci_low = sorted[percentile_index(b, tail)];
  res.ci_high = sorted[percentile_index(b, 1.0 - tail)];
  return res;
}

/// Convenience form for statistics over a plain vector of values.
template <typename Statistic>
BootstrapResult bootstrap_values(std::span<const double> data, Statistic&& statistic,
                                 const BootstrapConfig& cfg) {
  return bootstrap_ci(
      data.size(),
      [&](std::span<const std::size_t> idx) {
        std::vector<double> resample(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) resample[i] = data[idx[i]];
        return statistic(std::span<const double>(resample));
      },
      cfg);
}

}  // namespace fundus
