/*
 * Copyright 2026 The djack Authors.
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

#include "djack/plot.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "djack/error.h"

namespace djack {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad(double frac) {
    if (!(lo <= hi)) {
      lo = 0.0;
      hi = 1.0;
    }
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double m = (hi - lo) * frac;
    lo -= m;
    hi += m;
  }
};

// One plotting panel in pixel space.
struct Panel {
  double left, top, width, height;
  Range x, y;

  double px(double v) const { return left + (v - x.lo) / (x.hi - x.lo) * width; }
  double py(double v) const {
    const double c = std::clamp(v, y.lo, y.hi);
    return top + height - (c - y.lo) / (y.hi - y.lo) * height;
  }

  void axes(std::ostream& out, const std::string& xlabel,
            const std::string& ylabel) const {
    out << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\""
        << fmt(width) << "\" height=\"" << fmt(height)
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double xv = x.lo + (x.hi - x.lo) * k / 4.0;
      const double yv = y.lo + (y.hi - y.lo) * k / 4.0;
      out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(top + height + 16)
          << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
      out << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(yv) + 4)
          << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    out << "<text x=\"" << fmt(left + width / 2) << "\" y=\""
        << fmt(top + height + 34) << "\" text-anchor=\"middle\">" << xlabel
        << "</text>\n";
    out << "<text transform=\"translate(" << fmt(left - 44) << ","
        << fmt(top + height / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << ylabel << "</text>\n";
  }
};

void open_svg(std::ostream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
      << "font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" "
      << "font-size=\"14\">" << title << "</text>\n";
}

std::vector<std::size_t> order_by(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  return idx;
}

double parse_cell(const std::string& cell) {
  if (cell == "inf" || cell == "+inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || end != cell.c_str() + cell.size()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return v;
}

}  // namespace

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw UsageError("table has no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - header.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    out.push_back(c < row.size() ? row[c] : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty table");
  {
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) table.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) row.push_back(parse_cell(cell));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string band_svg(const CsvTable& band, const CsvTable& train,
                     const std::string& title) {
  const auto x = band.column("x");
  const auto pred = band.column("prediction");
  const auto lower = band.column("lower");
  const auto upper = band.column("upper");
  const auto tx = train.column("x");
  const auto ty = train.column("y");

  Panel panel{70, 36, kWidth - 100, kHeight - 90, {}, {}};
  for (const double v : x) panel.x.add(v);
  for (const double v : tx) panel.x.add(v);
  for (const auto* col : {&pred, &lower, &upper, &ty}) {
    for (const double v : *col) panel.y.add(v);
  }
  panel.x.pad(0.02);
  panel.y.pad(0.05);

  std::ostringstream out;
  open_svg(out, title);
  const auto idx = order_by(x);
  out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.6\" stroke=\"none\" points=\"";
  for (const std::size_t i : idx) {
    out << fmt(panel.px(x[i])) << ',' << fmt(panel.py(upper[i])) << ' ';
  }
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
    out << fmt(panel.px(x[*it])) << ',' << fmt(panel.py(lower[*it])) << ' ';
  }
  out << "\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\" points=\"";
  for (const std::size_t i : idx) {
    out << fmt(panel.px(x[i])) << ',' << fmt(panel.py(pred[i])) << ' ';
  }
  out << "\"/>\n";
  for (std::size_t i = 0; i < tx.size(); ++i) {
    if (!std::isfinite(tx[i]) || !std::isfinite(ty[i])) continue;
    out << "<circle cx=\"" << fmt(panel.px(tx[i])) << "\" cy=\""
        << fmt(panel.py(ty[i])) << "\" r=\"2.5\" fill=\"#d94801\"/>\n";
  }
  panel.axes(out, "x", "y");
  out << "</svg>\n";
  return out.str();
}

std::string sweep_svg(const CsvTable& sweep, const std::string& axis_label,
                      double target_coverage) {
  const auto value = sweep.column("value");
  const auto width = sweep.column("mean_width");
  const auto cover = sweep.column("coverage");
  const auto idx = order_by(value);

  const double panel_w = (kWidth - 180) / 2;
  Panel left{70, 36, panel_w, kHeight - 90, {}, {}};
  Panel right{70 + panel_w + 90, 36, panel_w, kHeight - 90, {}, {}};
  for (const double v : value) {
    left.x.add(v);
    right.x.add(v);
  }
  for (const double v : width) left.y.add(v);
  for (const double v : cover) right.y.add(v);
  right.y.add(target_coverage);
  right.y.add(1.0);
  left.x.pad(0.05);
  right.x.pad(0.05);
  left.y.pad(0.1);
  right.y.pad(0.05);

  std::ostringstream out;
  open_svg(out, "interval width and coverage against " + axis_label);
  const auto series = [&](const Panel& p, const std::vector<double>& ys,
                          const char* colour) {
    out << "<polyline fill=\"none\" stroke=\"" << colour
        << "\" stroke-width=\"2\" points=\"";
    for (const std::size_t i : idx) {
      if (std::isfinite(ys[i])) {
        out << fmt(p.px(value[i])) << ',' << fmt(p.py(ys[i])) << ' ';
      }
    }
    out << "\"/>\n";
    for (const std::size_t i : idx) {
      if (!std::isfinite(ys[i])) continue;
      out << "<circle cx=\"" << fmt(p.px(value[i])) << "\" cy=\""
          << fmt(p.py(ys[i])) << "\" r=\"3.5\" fill=\"" << colour << "\"/>\n";
    }
  };
  series(left, width, "#08519c");
  series(right, cover, "#238b45");
  out << "<line x1=\"" << fmt(right.left) << "\" x2=\""
      << fmt(right.left + right.width) << "\" y1=\""
      << fmt(right.py(target_coverage)) << "\" y2=\""
      << fmt(right.py(target_coverage))
      << "\" stroke=\"#888\" stroke-dasharray=\"5,4\"/>\n";
  left.axes(out, axis_label, "mean width");
  right.axes(out, axis_label, "coverage");
  out << "</svg>\n";
  return out.str();
}

}  // namespace djack
