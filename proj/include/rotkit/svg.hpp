#pragma once

#include <string>

#include "rotkit/csv.hpp"

namespace rotkit::io {

enum class PlotKind { scatter, density, vecfield, paths };

PlotKind plot_kind_from_tag(const std::string& tag);

/// Renders a result table as a static SVG figure. The table schema must
/// match the plot kind (DataError otherwise):
///   scatter  - two leading numeric columns (optional `rep` group column);
///              a ratio-1 reference line is overlaid for d_so3/d_repr data.
///   density  - gradient-ratio schema (projection, ratio_pair, ratio);
///              kernel densities of log10 ratios, bandwidth recorded in the
///              SVG metadata.
///   vecfield - y1, y2, gx, gy, defined.
///   paths    - run, iter, vector, comp_x, comp_y, comp_z, loss; the xy
///              projection of each vector trace.
/// An empty table yields a figure with empty axes.
std::string render_plot(const CsvTable& table, PlotKind kind);

} // namespace rotkit::io
