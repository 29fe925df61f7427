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

#include "swfqi/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "swfqi/errors.hpp"
#include "swfqi/run_io.hpp"

namespace swfqi {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double v) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << v;
  return ss.str();
}

}  // namespace

std::string render_svg(const std::vector<AggregateSummary>& arms, const SvgOptions& options) {
  if (arms.empty()) throw InvalidSpec("render_svg needs at least one arm");
  const double left = 70, right = 160, top = 40, bottom = 50;
  const double w = options.width, h = options.height;
  const double pw = w - left - right, ph = h - top - bottom;

  auto usable = [&](double v) { return std::isfinite(v) && (!options.log_y || v > 0.0); };
  auto ty = [&](double v) { return options.log_y ? std::log10(v) : v; };

  double kmin = std::numeric_limits<double>::infinity(), kmax = -kmin;
  double ymin = kmin, ymax = -kmin;
  for (const auto& arm : arms) {
    for (const auto& b : arm.bands) {
      kmin = std::min(kmin, static_cast<double>(b.k));
      kmax = std::max(kmax, static_cast<double>(b.k));
      for (double v : {b.mean, b.q25, b.q75}) {
        if (!usable(v) || (!options.bands && v != b.mean)) continue;
        ymin = std::min(ymin, ty(v));
        ymax = std::max(ymax, ty(v));
      }
    }
  }
  if (!(kmax > kmin)) kmax = kmin + 1.0;
  if (!std::isfinite(ymin)) ymin = 0.0, ymax = 1.0;
  if (!(ymax > ymin)) ymax = ymin + 1.0;

  auto px = [&](double k) { return left + (k - kmin) / (kmax - kmin) * pw; };
  auto py = [&](double v) { return top + (1.0 - (ty(v) - ymin) / (ymax - ymin)) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"15\">" << escape(options.title) << "</text>\n";
  }
  svg << "<rect x=\"" << fixed(left) << "\" y=\"" << fixed(top) << "\" width=\"" << fixed(pw)
      << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"#444\"/>\n";

  // Axis ticks: five evenly spaced labels on each axis.
  for (int i = 0; i <= 4; ++i) {
    const double k = kmin + (kmax - kmin) * i / 4.0;
    svg << "<text x=\"" << fixed(px(k)) << "\" y=\"" << fixed(top + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << static_cast<long>(std::lround(k)) << "</text>\n";
    const double yv = ymin + (ymax - ymin) * i / 4.0;
    const double ypix = top + (1.0 - i / 4.0) * ph;
    const std::string label = options.log_y ? "1e" + fixed(yv).substr(0, fixed(yv).find('.') + 2)
                                            : format_double(yv);
    svg << "<text x=\"" << fixed(left - 6) << "\" y=\"" << fixed(ypix + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << escape(label)
        << "</text>\n";
  }
  svg << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << fixed(h - 10)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration</text>\n";

  if (options.marker_k) {
    const double x = px(static_cast<double>(*options.marker_k));
    svg << "<line x1=\"" << fixed(x) << "\" y1=\"" << fixed(top) << "\" x2=\"" << fixed(x)
        << "\" y2=\"" << fixed(top + ph) << "\" stroke=\"#777\" stroke-dasharray=\"6,4\"/>\n";
  }

  for (std::size_t a = 0; a < arms.size(); ++a) {
    const char* color = kPalette[a % std::size(kPalette)];
    const auto& bands = arms[a].bands;
    if (options.bands) {
      std::ostringstream upper, lower;
      bool any = false;
      for (const auto& b : bands) {
        if (usable(b.q25) && usable(b.q75)) {
          upper << fixed(px(b.k)) << ',' << fixed(py(b.q75)) << ' ';
          any = true;
        }
      }
      for (auto it = bands.rbegin(); it != bands.rend(); ++it) {
        if (usable(it->q25) && usable(it->q75)) lower << fixed(px(it->k)) << ',' << fixed(py(it->q25)) << ' ';
      }
      if (any) {
        svg << "<polygon points=\"" << upper.str() << lower.str() << "\" fill=\"" << color
            << "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
      }
    }
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
    for (const auto& b : bands) {
      if (usable(b.mean)) svg << fixed(px(b.k)) << ',' << fixed(py(b.mean)) << ' ';
    }
    svg << "\"/>\n";
    const double ly = top + 16 + 18 * static_cast<double>(a);
    svg << "<line x1=\"" << fixed(left + pw + 12) << "\" y1=\"" << fixed(ly) << "\" x2=\""
        << fixed(left + pw + 32) << "\" y2=\"" << fixed(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed(left + pw + 38) << "\" y=\"" << fixed(ly + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(arms[a].arm) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace swfqi
