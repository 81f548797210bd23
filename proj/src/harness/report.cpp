#include "hainav/harness/report.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hainav/harness/config.hpp"
#include "hainav/sim/render.hpp"

namespace hainav::harness {

namespace fs = std::filesystem;

void render_line_plot(const std::string& path, const std::vector<std::vector<double>>& series,
                      const std::vector<std::array<double, 3>>& colors, double y_max) {
  const int H = 240, W = 360, margin = 24;
  std::vector<double> img(static_cast<size_t>(3) * H * W, 1.0);
  auto put = [&](int x, int y, const std::array<double, 3>& rgb) {
    if (x < 0 || y < 0 || x >= W || y >= H) return;
    for (int c = 0; c < 3; ++c) img[(static_cast<size_t>(c) * H + y) * W + x] = rgb[c];
  };
  const std::array<double, 3> axis{0.2, 0.2, 0.2};
  for (int x = margin; x < W - 4; ++x) put(x, H - margin, axis);
  for (int y = 4; y <= H - margin; ++y) put(margin, y, axis);

  size_t max_len = 1;
  for (const auto& s : series) max_len = std::max(max_len, s.size());
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const auto& rgb = colors[k % colors.size()];
    for (size_t i = 1; i < s.size(); ++i) {
      const auto map = [&](size_t idx, double v) {
        const int x = margin + static_cast<int>((W - margin - 8) * idx / std::max<size_t>(1, max_len - 1));
        const int y = H - margin - static_cast<int>((H - margin - 8) * std::clamp(v / y_max, 0.0, 1.0));
        return std::pair<int, int>{x, y};
      };
      auto [x0, y0] = map(i - 1, s[i - 1]);
      auto [x1, y1] = map(i, s[i]);
      const int steps = std::max(std::abs(x1 - x0), std::abs(y1 - y0)) + 1;
      for (int t = 0; t <= steps; ++t)
        put(x0 + (x1 - x0) * t / steps, y0 + (y1 - y0) * t / steps, rgb);
    }
  }
  sim::write_ppm(path, img, H, W);
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(cell);
    if (!row.empty()) rows.push_back(row);
  }
  return rows;
}

// Mean coverage over runs at fixed checkpoints, filling forward after a run ends.
std::vector<double> mean_coverage_curve(const std::string& dir, int checkpoint_every,
                                        int max_steps) {
  std::vector<std::vector<double>> curves;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("run_", 0) != 0 || entry.path().extension() != ".csv") continue;
    std::vector<double> curve;
    const auto rows = read_csv(entry.path().string());
    for (size_t i = 1; i < rows.size(); ++i) curve.push_back(std::stod(rows[i][2]));
    if (!curve.empty()) curves.push_back(std::move(curve));
  }
  std::vector<double> mean;
  if (curves.empty()) return mean;
  for (int step = 0; step <= max_steps; step += checkpoint_every) {
    double acc = 0.0;
    for (const auto& c : curves)
      acc += c[std::min<size_t>(step, c.size() - 1)];
    mean.push_back(acc / curves.size());
  }
  return mean;
}

}  // namespace

bool build_report(const std::string& run_dir) {
  const fs::path root(run_dir);
  const fs::path out = root / "report";
  bool produced = false;
  fs::create_directories(out);

  // Coverage curves (agent vs random baseline when present).
  std::vector<std::vector<double>> cov_series;
  std::vector<std::array<double, 3>> cov_colors;
  if (fs::exists(root / "explore")) {
    auto mean = mean_coverage_curve((root / "explore").string(), 100, 1500);
    if (!mean.empty()) {
      cov_series.push_back(mean);
      cov_colors.push_back({0.1, 0.3, 0.9});
    }
  }
  if (fs::exists(root / "explore_random")) {
    auto mean = mean_coverage_curve((root / "explore_random").string(), 100, 1500);
    if (!mean.empty()) {
      cov_series.push_back(mean);
      cov_colors.push_back({0.8, 0.2, 0.2});
    }
  }
  if (!cov_series.empty()) {
    std::ofstream csv(out / "coverage_curves.csv");
    csv << "checkpoint_step";
    csv << (cov_series.size() > 1 ? ",agent_mean_coverage,random_mean_coverage"
                                  : ",agent_mean_coverage");
    csv << '\n';
    for (size_t i = 0; i < cov_series[0].size(); ++i) {
      csv << i * 100;
      for (const auto& s : cov_series) csv << ',' << (i < s.size() ? s[i] : s.back());
      csv << '\n';
    }
    render_line_plot((out / "coverage_curves.ppm").string(), cov_series, cov_colors, 1.0);
    produced = true;
  }

  // Goal summary table.
  if (fs::exists(root / "goal" / "summary.csv")) {
    const auto rows = read_csv((root / "goal" / "summary.csv").string());
    int succ = 0, n = 0;
    double steps = 0;
    long astar = 0;
    for (size_t i = 1; i < rows.size(); ++i) {
      ++n;
      if (rows[i][1] == "1") {
        ++succ;
        steps += std::stod(rows[i][5]);
      }
      astar += std::stol(rows[i][6]);
    }
    std::ofstream csv(out / "goal_summary.csv");
    csv << "runs,success_rate,mean_steps_successful,oracle_mean_steps\n";
    csv << n << ',' << (n ? static_cast<double>(succ) / n : 0.0) << ','
        << (succ ? steps / succ : -1.0) << ',' << (n ? static_cast<double>(astar) / n : -1.0)
        << '\n';
    produced = true;
  }

  // Place-model generalization curve.
  if (fs::exists(root / "allo_val_mse.csv")) {
    const auto rows = read_csv((root / "allo_val_mse.csv").string());
    std::vector<double> mse;
    for (size_t i = 1; i < rows.size(); ++i) mse.push_back(std::stod(rows[i][1]));
    if (!mse.empty()) {
      render_line_plot((out / "mse_vs_observations.ppm").string(), {mse}, {{0.1, 0.5, 0.2}},
                       std::max(0.5, *std::max_element(mse.begin(), mse.end())));
      fs::copy_file(root / "allo_val_mse.csv", out / "mse_vs_observations.csv",
                    fs::copy_options::overwrite_existing);
      produced = true;
    }
  }

  // Hypothesis traces and stitched maps are copied through when present.
  for (const std::string sub : {"explore", "goal"}) {
    if (!fs::exists(root / sub)) continue;
    for (const auto& entry : fs::directory_iterator(root / sub)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("trace_", 0) == 0 || name.rfind("stitched_", 0) == 0) {
        fs::copy_file(entry.path(), out / name, fs::copy_options::overwrite_existing);
        produced = true;
      }
    }
  }

  if (!produced) {
    write_text_file((out / "EMPTY.txt").string(),
                    "no metrics found under " + run_dir + "; nothing to report\n");
  }
  return produced;
}

}  // namespace hainav::harness
