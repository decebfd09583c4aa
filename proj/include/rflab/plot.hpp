#pragma once

// Static SVG rendering of a trajectory table: one pane per column against t.

#include "rflab/report_io.hpp"

#include <string>

namespace rflab {

/// Deterministic SVG (identical bytes for identical input). Non-finite values
/// break the curve. Throws InvalidArgument if the table has no `t` column or
/// no rows.
std::string render_svg(const CsvTable& table);

}  // namespace rflab
