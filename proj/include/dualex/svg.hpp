/*
 * Copyright 2026 The dualex Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

/**
 * @file svg.hpp
 * @brief Minimal static SVG charts: scatter, line and grouped bars.
 */

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "dualex/errors.hpp"

namespace dualex::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Style {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 640;
  int height = 420;
  bool log_x = false;
  bool log_y = false;
  bool diagonal = false;  // y = x reference line (scatter)
};

namespace detail {

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return palette[i % 8];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

inline std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
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

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;

  double t(double v) const {
    if (log) {
      v = std::log10(std::max(v, std::numeric_limits<double>::min()));
    }
    return (v - lo) / (hi - lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::ceil(lo); e <= hi + 1e-9; e += 1.0) out.push_back(std::pow(10.0, e));
      if (out.empty()) out.push_back(std::pow(10.0, lo));
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      step = m * mag;
      if (raw <= step) break;
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step)
      out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
  }
};

inline Axis make_axis(std::vector<double> values, bool log, bool include_zero) {
  Axis a;
  a.log = log;
  if (log) {
    for (double& v : values) v = std::log10(std::max(v, 1e-300));
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (include_zero && !log) lo = std::min(lo, 0.0), hi = std::max(hi, 0.0);
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = log ? 0.1 * (hi - lo) : 0.05 * (hi - lo);
  a.lo = (include_zero && lo == 0.0 && !log) ? 0.0 : lo - pad;
  a.hi = hi + pad;
  return a;
}

struct Frame {
  double left = 70, right = 20, top = 40, bottom = 55;
  int width, height;
  Axis ax, ay;

  double X(double v) const { return left + ax.t(v) * (width - left - right); }
  double Y(double v) const { return height - bottom - ay.t(v) * (height - top - bottom); }
};

inline void open(std::ostringstream& os, const Style& st) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << st.width << "\" height=\"" << st.height
     << "\" viewBox=\"0 0 " << st.width << " " << st.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!st.title.empty())
    os << "<text x=\"" << st.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(st.title) << "</text>\n";
}

inline void axes(std::ostringstream& os, const Frame& f, const Style& st, bool x_ticks = true) {
  const double x0 = f.left, x1 = f.width - f.right, y0 = f.height - f.bottom, y1 = f.top;
  os << "<rect x=\"" << px(x0) << "\" y=\"" << px(y1) << "\" width=\"" << px(x1 - x0) << "\" height=\""
     << px(y0 - y1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double v : f.ay.ticks()) {
    const double y = f.Y(v);
    os << "<line x1=\"" << px(x0) << "\" y1=\"" << px(y) << "\" x2=\"" << px(x1) << "\" y2=\"" << px(y)
       << "\" stroke=\"#e5e5e5\"/>\n";
    os << "<text x=\"" << px(x0 - 6) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">" << num(v)
       << "</text>\n";
  }
  if (x_ticks) {
    for (double v : f.ax.ticks()) {
      const double x = f.X(v);
      os << "<line x1=\"" << px(x) << "\" y1=\"" << px(y0) << "\" x2=\"" << px(x) << "\" y2=\"" << px(y0 + 5)
         << "\" stroke=\"#444\"/>\n";
      os << "<text x=\"" << px(x) << "\" y=\"" << px(y0 + 18) << "\" text-anchor=\"middle\">" << num(v)
         << "</text>\n";
    }
  }
  if (!st.x_label.empty())
    os << "<text x=\"" << px((x0 + x1) / 2) << "\" y=\"" << px(f.height - 12.0)
       << "\" text-anchor=\"middle\">" << escape(st.x_label) << "</text>\n";
  if (!st.y_label.empty())
    os << "<text x=\"16\" y=\"" << px((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << px((y0 + y1) / 2) << ")\">" << escape(st.y_label) << "</text>\n";
}

inline void legend(std::ostringstream& os, const Frame& f, const std::vector<std::string>& names) {
  double y = f.top + 14;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i].empty()) continue;
    const double x = f.width - f.right - 120;
    os << "<rect x=\"" << px(x) << "\" y=\"" << px(y - 9) << "\" width=\"10\" height=\"10\" fill=\"" << color(i)
       << "\"/>\n";
    os << "<text x=\"" << px(x + 15) << "\" y=\"" << px(y) << "\">" << escape(names[i]) << "</text>\n";
    y += 16;
  }
}

inline std::vector<std::string> names_of(const std::vector<Series>& series) {
  std::vector<std::string> out;
  for (const auto& s : series) out.push_back(s.name);
  return out;
}

}  // namespace detail

inline std::string scatter(const std::vector<Series>& series, const Style& st) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  if (st.diagonal) {
    std::vector<double> both = xs;
    both.insert(both.end(), ys.begin(), ys.end());
    xs = ys = both;
  }
  detail::Frame f{70, 20, 40, 55, st.width, st.height, detail::make_axis(xs, st.log_x, false),
                  detail::make_axis(ys, st.log_y, false)};
  std::ostringstream os;
  detail::open(os, st);
  detail::axes(os, f, st);
  if (st.diagonal) {
    const double lo = st.log_x ? std::pow(10.0, f.ax.lo) : f.ax.lo;
    const double hi = st.log_x ? std::pow(10.0, f.ax.hi) : f.ax.hi;
    os << "<line x1=\"" << detail::px(f.X(lo)) << "\" y1=\"" << detail::px(f.Y(lo)) << "\" x2=\""
       << detail::px(f.X(hi)) << "\" y2=\"" << detail::px(f.Y(hi))
       << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
      os << "<circle cx=\"" << detail::px(f.X(s.x[k])) << "\" cy=\"" << detail::px(f.Y(s.y[k]))
         << "\" r=\"3\" fill=\"" << detail::color(i) << "\" fill-opacity=\"0.7\"/>\n";
  }
  detail::legend(os, f, detail::names_of(series));
  os << "</svg>\n";
  return os.str();
}

inline std::string line(const std::vector<Series>& series, const Style& st) {
  std::vector<double> xs, ys;
  for (const auto& s : series) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  detail::Frame f{70, 20, 40, 55, st.width, st.height, detail::make_axis(xs, st.log_x, false),
                  detail::make_axis(ys, st.log_y, false)};
  std::ostringstream os;
  detail::open(os, st);
  detail::axes(os, f, st);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    os << "<polyline fill=\"none\" stroke=\"" << detail::color(i) << "\" stroke-width=\"2\" points=\"";
    for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k)
      os << (k ? " " : "") << detail::px(f.X(s.x[k])) << "," << detail::px(f.Y(s.y[k]));
    os << "\"/>\n";
  }
  detail::legend(os, f, detail::names_of(series));
  os << "</svg>\n";
  return os.str();
}

// One group of bars per category; series[i].y[c] is the height of bar i in
// category c.
inline std::string bars(const std::vector<std::string>& categories, const std::vector<Series>& series,
                        const Style& st) {
  std::vector<double> ys;
  for (const auto& s : series) ys.insert(ys.end(), s.y.begin(), s.y.end());
  detail::Frame f{70, 20, 40, 55, st.width, st.height, detail::Axis{0.0, 1.0, false},
                  detail::make_axis(ys, false, true)};
  std::ostringstream os;
  detail::open(os, st);
  detail::axes(os, f, st, false);
  const double plot_w = st.width - f.left - f.right;
  const double group_w = categories.empty() ? plot_w : plot_w / static_cast<double>(categories.size());
  const double bar_w = 0.8 * group_w / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  const double base = f.Y(std::max(f.ay.lo, 0.0));
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = f.left + group_w * static_cast<double>(c) + 0.1 * group_w;
    for (std::size_t i = 0; i < series.size(); ++i) {
      if (c >= series[i].y.size()) continue;
      const double top = f.Y(series[i].y[c]);
      const double y = std::min(top, base), h = std::abs(base - top);
      os << "<rect x=\"" << detail::px(gx + bar_w * static_cast<double>(i)) << "\" y=\"" << detail::px(y)
         << "\" width=\"" << detail::px(bar_w) << "\" height=\"" << detail::px(h) << "\" fill=\""
         << detail::color(i) << "\"/>\n";
    }
    os << "<text x=\"" << detail::px(gx + 0.4 * group_w) << "\" y=\"" << detail::px(st.height - f.bottom + 18)
       << "\" text-anchor=\"middle\">" << detail::escape(categories[c]) << "</text>\n";
  }
  detail::legend(os, f, detail::names_of(series));
  os << "</svg>\n";
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IngestionError("write to '" + path + "' failed");
}

}  // namespace dualex::svg
