#pragma once

#include <string>
#include <vector>

#include "freerider/io.hpp"

namespace freerider {

struct PlotPanel {
  std::string title;
  CsvTable table;  // learning-curve schema (see learning_curve_csv)
};

// Deterministic standalone SVG: one panel per table, one polyline per
// defection probability column, grouped by (seed, stage, slot) when a table
// mixes several curves. The source rows are embedded as an XML comment so the
// image stays self-describing. Throws when a required column is missing,
// naming the column.
std::string render_learning_curves_svg(const std::vector<PlotPanel>& panels);

}  // namespace freerider
