#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fairaudit/metrics.hpp"
#include "fairaudit/pipeline.hpp"
#include "fairaudit/schema.hpp"

namespace fairaudit::report {

/// Fixed-point text, round-half-even on the binary value. NaN gives "—".
std::string format_decimal(double value, int precision = 3);
/// Three significant digits; used for p-values. NaN gives "—".
std::string format_p_value(double p);

/// Group table: one row per level of the first grouping attribute plus its
/// union, one column per level combination of the remaining attributes
/// (union last). Empty groups render as "—". A single grouping attribute
/// gives one value column named after the metric.
std::string render_group_table(const GroupRatesResult& groups, const AttributeSchema& schema,
                               Metric metric);

enum class ColorScale {
  kDiverging,   // blue (negative) - white (0) - red (positive)
  kSequential,  // dark blue (0) - white (1), for p-values
};

struct Rgb {
  int r = 0;
  int g = 0;
  int b = 0;
  bool operator==(const Rgb&) const = default;
};

/// Diverging: t = clamp(value / bound, -1, 1); white mixed linearly towards
/// (33,102,172) for t < 0 and (178,24,43) for t > 0. Sequential: t =
/// clamp(value, 0, 1) mixes (8,48,107) at 0 into white at 1. Channels are
/// rounded to the nearest integer. Non-finite values give gray (200,200,200).
Rgb scale_color(double value, ColorScale scale, double bound = 1.0);
std::string hex_color(Rgb color);

struct Heatmap {
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<double> values;    // row-major
  std::vector<double> p_values;  // row-major, same shape; NaN = no test
  ColorScale scale = ColorScale::kDiverging;
  /// Diverging bound; <= 0 picks the largest finite |value| (1 if none).
  double bound = 0.0;
};

/// Standalone SVG. A cell gets glyph "o" when p < 0.05 and "\" when
/// p < 0.01, both for p < 0.01. Data error on shape mismatch.
std::string render_heatmap_svg(const Heatmap& map);

/// Writes report.json, tables/*.csv and figures/*.svg into `dir`. Data error
/// when the bundle has no operating point or `dir` cannot be written.
void emit_bundle(const AuditBundle& bundle, const AttributeSchema& schema,
                 const std::filesystem::path& dir);

/// The report.json document, keys sorted.
std::string bundle_json_text(const AuditBundle& bundle);

}  // namespace fairaudit::report
