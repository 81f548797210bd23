#pragma once

#include <array>
#include <string>
#include <vector>

namespace hainav::harness {

// Aggregates run metrics under run_dir into CSV tables and rendered images in
// run_dir/report. Returns false (and writes a notice) when nothing was found.
bool build_report(const std::string& run_dir);

// Minimal line-chart rendering onto an RGB canvas, written as PPM.
void render_line_plot(const std::string& path, const std::vector<std::vector<double>>& series,
                      const std::vector<std::array<double, 3>>& colors, double y_max);

}  // namespace hainav::harness
