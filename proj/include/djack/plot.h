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

// Static SVG figures. Each renderer reads only the CSV tables it is given, so
// a figure can always be regenerated from the files next to it.

#ifndef DJACK_PLOT_H_
#define DJACK_PLOT_H_

#include <filesystem>
#include <string>
#include <vector>

namespace djack {

// Numeric CSV with a header row. Cells that do not parse as numbers (and
// "inf"/"-inf") are kept as NaN or infinities respectively.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws UsageError when the column is absent.
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv_table(const std::filesystem::path& path);

// Training points, prediction curve and interval band. `band` needs columns
// x, prediction, lower, upper; `train` needs x, y.
std::string band_svg(const CsvTable& band, const CsvTable& train,
                     const std::string& title);

// Mean width (left panel) and coverage (right panel) against the swept value.
// Needs columns value, mean_width, coverage; `target_coverage` is drawn as a
// dashed reference line.
std::string sweep_svg(const CsvTable& sweep, const std::string& axis_label,
                      double target_coverage);

}  // namespace djack

#endif  // DJACK_PLOT_H_
