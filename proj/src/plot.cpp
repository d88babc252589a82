#include "freerider/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace freerider {
namespace {

constexpr int kPanelWidth = 460;
constexpr int kPanelHeight = 320;
constexpr int kMarginLeft = 56;
constexpr int kMarginRight = 16;
constexpr int kMarginTop = 36;
constexpr int kMarginBottom = 44;

constexpr const char* kStateColumns[] = {"p_defect_start", "p_defect_cc", "p_defect_cd",
                                         "p_defect_dc", "p_defect_dd"};
constexpr const char* kStateLabels[] = {"start", "cc", "cd", "dc", "dd"};
constexpr const char* kStateColors[] = {"#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd"};
constexpr const char* kDashPatterns[] = {"", "6,3", "2,2", "8,2,2,2", "4,4"};

std::string fixed2(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", value);
  return buffer;
}

double parse_number(const std::string& text, const std::string& column) {
  try {
    return std::stod(text);
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse '" + text + "' in column '" + column + "'");
  }
}

struct Series {
  std::string group;  // "seed=S stage=T slot=U"
  int state = 0;
  std::vector<double> x;
  std::vector<double> y;
};

}  // namespace

std::string render_learning_curves_svg(const std::vector<PlotPanel>& panels) {
  if (panels.empty()) {
    throw std::invalid_argument("no panels to plot");
  }
  const int width = kPanelWidth * static_cast<int>(panels.size());
  const int height = kPanelHeight;

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const PlotPanel& panel = panels[p];
    const CsvTable& table = panel.table;
    const std::size_t update_col = table.column("update");
    const std::size_t seed_col = table.column("seed");
    const std::size_t stage_col = table.column("stage");
    const std::size_t slot_col = table.column("slot");
    std::size_t state_cols[5];
    for (int s = 0; s < 5; ++s) state_cols[s] = table.column(kStateColumns[s]);

    // Group rows by identity, preserving first-appearance order.
    std::vector<std::string> group_order;
    std::map<std::string, std::size_t> group_index;
    std::vector<Series> series;
    for (const auto& row : table.rows) {
      const std::string group = "seed=" + row[seed_col] + " stage=" + row[stage_col] +
                                " slot=" + row[slot_col];
      auto it = group_index.find(group);
      if (it == group_index.end()) {
        it = group_index.emplace(group, group_order.size()).first;
        group_order.push_back(group);
        for (int s = 0; s < 5; ++s) {
          Series next;
          next.group = group;
          next.state = s;
          series.push_back(std::move(next));
        }
      }
      const double x = parse_number(row[update_col], "update");
      for (int s = 0; s < 5; ++s) {
        Series& line = series[it->second * 5 + static_cast<std::size_t>(s)];
        line.x.push_back(x);
        line.y.push_back(parse_number(row[state_cols[s]], kStateColumns[s]));
      }
    }

    double x_min = 0.0;
    double x_max = 1.0;
    bool have_x = false;
    for (const Series& line : series) {
      for (const double x : line.x) {
        if (!have_x) {
          x_min = x_max = x;
          have_x = true;
        } else {
          x_min = std::min(x_min, x);
          x_max = std::max(x_max, x);
        }
      }
    }
    if (x_max <= x_min) x_max = x_min + 1.0;

    const double origin_x = static_cast<double>(p) * kPanelWidth;
    const double plot_x = origin_x + kMarginLeft;
    const double plot_y = kMarginTop;
    const double plot_w = kPanelWidth - kMarginLeft - kMarginRight;
    const double plot_h = kPanelHeight - kMarginTop - kMarginBottom;
    const auto to_px = [&](double x, double y) {
      const double px = plot_x + (x - x_min) / (x_max - x_min) * plot_w;
      const double py = plot_y + (1.0 - y) * plot_h;
      return std::pair<double, double>(px, py);
    };

    svg << "<g>\n";
    svg << "<text x=\"" << fixed2(origin_x + kPanelWidth / 2.0) << "\" y=\"22\" "
        << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << panel.title
        << "</text>\n";
    svg << "<rect x=\"" << fixed2(plot_x) << "\" y=\"" << fixed2(plot_y) << "\" width=\""
        << fixed2(plot_w) << "\" height=\"" << fixed2(plot_h)
        << "\" fill=\"none\" stroke=\"#444444\"/>\n";

    // Axis ticks: y at 0, 0.5, 1; x at min, mid, max.
    for (const double tick : {0.0, 0.5, 1.0}) {
      const auto [tx, ty] = to_px(x_min, tick);
      svg << "<line x1=\"" << fixed2(tx - 4) << "\" y1=\"" << fixed2(ty) << "\" x2=\""
          << fixed2(tx) << "\" y2=\"" << fixed2(ty) << "\" stroke=\"#444444\"/>\n";
      svg << "<text x=\"" << fixed2(tx - 8) << "\" y=\"" << fixed2(ty + 4)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fixed2(tick)
          << "</text>\n";
    }
    for (const double frac : {0.0, 0.5, 1.0}) {
      const double x = x_min + frac * (x_max - x_min);
      const auto [tx, ty] = to_px(x, 0.0);
      svg << "<line x1=\"" << fixed2(tx) << "\" y1=\"" << fixed2(ty) << "\" x2=\"" << fixed2(tx)
          << "\" y2=\"" << fixed2(ty + 4) << "\" stroke=\"#444444\"/>\n";
      svg << "<text x=\"" << fixed2(tx) << "\" y=\"" << fixed2(ty + 18)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
          << fixed2(x) << "</text>\n";
    }
    svg << "<text x=\"" << fixed2(plot_x + plot_w / 2.0) << "\" y=\""
        << fixed2(plot_y + plot_h + 34)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">update</text>\n";
    svg << "<text x=\"" << fixed2(origin_x + 14) << "\" y=\"" << fixed2(plot_y + plot_h / 2.0)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 " << fixed2(origin_x + 14) << ' '
        << fixed2(plot_y + plot_h / 2.0) << ")\">p(defect)</text>\n";

    for (const Series& line : series) {
      if (line.x.empty()) continue;
      const std::size_t group_idx = group_index.at(line.group);
      const char* dash = kDashPatterns[group_idx % 5];
      svg << "<polyline fill=\"none\" stroke=\"" << kStateColors[line.state]
          << "\" stroke-width=\"1.5\"";
      if (dash[0] != '\0') svg << " stroke-dasharray=\"" << dash << '"';
      svg << " points=\"";
      for (std::size_t i = 0; i < line.x.size(); ++i) {
        const auto [px, py] = to_px(line.x[i], line.y[i]);
        if (i > 0) svg << ' ';
        svg << fixed2(px) << ',' << fixed2(py);
      }
      svg << "\"/>\n";
    }

    // Legend: one swatch per state along the top edge of the plot area.
    for (int s = 0; s < 5; ++s) {
      const double lx = plot_x + 8 + 74.0 * s;
      const double ly = plot_y + 12;
      svg << "<rect x=\"" << fixed2(lx) << "\" y=\"" << fixed2(ly - 8)
          << "\" width=\"10\" height=\"10\" fill=\"" << kStateColors[s] << "\"/>\n";
      svg << "<text x=\"" << fixed2(lx + 14) << "\" y=\"" << fixed2(ly + 1)
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << kStateLabels[s] << "</text>\n";
    }

    // Embedded source data keeps the image auditable on its own.
    svg << "<!-- data title=\"" << panel.title << "\"\n";
    for (std::size_t c = 0; c < table.header.size(); ++c) {
      if (c > 0) svg << ',';
      svg << table.header[c];
    }
    svg << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c > 0) svg << ',';
        svg << row[c];
      }
      svg << '\n';
    }
    svg << "-->\n";
    svg << "</g>\n";
  }

  svg << "</svg>\n";
  return svg.str();
}

}  // namespace freerider
