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

// Umbrella header for everything except image file I/O, which lives in
// fundus/image_io.hpp because it needs OpenCV.

#include "fundus/bootstrap.hpp"
#include "fundus/config.hpp"
#include "fundus/csv.hpp"
#include "fundus/dataset.hpp"
#include "fundus/error.hpp"
#include "fundus/eye.hpp"
#include "fundus/fusion.hpp"
#include "fundus/image.hpp"
#include "fundus/imaging.hpp"
#include "fundus/metrics.hpp"
#include "fundus/parallel.hpp"
#include "fundus/quality.hpp"
#include "fundus/random.hpp"
#include "fundus/report.hpp"
#include "fundus/synth.hpp"
#include "fundus/task.hpp"
#include "fundus/tensor_io.hpp"
