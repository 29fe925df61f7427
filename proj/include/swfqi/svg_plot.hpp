// Copyright 2026 The swfqi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "swfqi/experiment.hpp"

namespace swfqi {

struct SvgOptions {
  int width = 720;
  int height = 440;
  bool log_y = true;
  bool bands = true;
  std::string title;
  /// Dashed vertical line, e.g. where the temperature reaches its target.
  std::optional<long> marker_k;
};

/// Static line plot of each arm's mean error_sq with its 25–75% band.
/// Non-positive values are dropped on a log axis.
std::string render_svg(const std::vector<AggregateSummary>& arms, const SvgOptions& options = {});

}  // namespace swfqi
