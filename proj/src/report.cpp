#include "fairaudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "fairaudit/error.hpp"
#include "fairaudit/serialize.hpp"

namespace fairaudit::report {
namespace {

constexpr const char* kMissing = "—";
constexpr int kCellWidth = 64;
constexpr int kCellHeight = 24;
constexpr int kCharWidth = 7;
constexpr int kPad = 12;

std::size_t code_points(std::string_view text) {
  return static_cast<std::size_t>(
      std::count_if(text.begin(), text.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string xml_escape(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

int mix(int from, int to, double t) {
  return static_cast<int>(std::lround(from + (to - from) * t));
}

Rgb blend(Rgb from, Rgb to, double t) {
  return {mix(from.r, to.r, t), mix(from.g, to.g, t), mix(from.b, to.b, t)};
}

std::string level_or_union(const AttributeSchema& schema, std::size_t var,
                           const std::optional<int>& level) {
  const auto& levels = schema.at(var).kind.levels;
  if (level) return levels.at(static_cast<std::size_t>(*level));
  std::string joined;
  for (std::size_t i = 0; i < levels.size(); ++i) joined += (i ? "∪" : "") + levels[i];
  return joined;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    const bool quote = fields[i].find_first_of(",\"\n\r") != std::string::npos;
    if (quote) {
      line += '"';
      for (char c : fields[i]) line += c == '"' ? std::string("\"\"") : std::string(1, c);
      line += '"';
    } else {
      line += fields[i];
    }
  }
  return line + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_data("report", fmt::format("cannot write '{}'", path.string()));
  out << text;
  out.flush();
  if (!out) throw_data("report", fmt::format("cannot write '{}'", path.string()));
}

std::string deltas_csv(const std::vector<FairnessDelta>& deltas) {
  std::string text = csv_line({"group_i", "group_j", "delta_far", "delta_frr"});
  for (const auto& d : deltas) {
    text += csv_line({d.group_i, d.group_j, format_decimal(d.delta_far),
                      format_decimal(d.delta_frr)});
  }
  return text;
}

std::string correlations_csv(const std::vector<ExplanatoryReport>& reports) {
  std::string text = csv_line({"dependent", "column", "r", "p_value", "n", "note"});
  for (const auto& rep : reports) {
    for (const auto& c : rep.correlations) {
      const double nan = std::nan("");
      text += csv_line({std::string(metric_name(rep.dependent)), c.column,
                        format_decimal(c.result ? c.result->r : nan),
                        format_p_value(c.result ? c.result->p_value : nan),
                        c.result ? std::to_string(c.result->n) : std::string(), c.note});
    }
  }
  return text;
}

std::string regression_csv(const ExplanatoryReport& rep) {
  const auto& fit = rep.regression.fit;
  std::string text = csv_line({"column", "coefficient", "std_error", "t_stat", "p_value"});
  for (std::size_t k = 0; k < fit.column_names.size(); ++k) {
    text += csv_line({fit.column_names[k], format_decimal(fit.coefficients[k]),
                      format_decimal(fit.std_errors[k]), format_decimal(fit.t_stats[k]),
                      format_p_value(fit.p_values[k])});
  }
  return text;
}

std::string kruskal_csv(const PValueMatrix& m) {
  std::vector<std::string> header{""};
  header.insert(header.end(), m.labels.begin(), m.labels.end());
  std::string text = csv_line(header);
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<std::string> row{m.labels[i]};
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(format_p_value(m.p(i, j)));
    text += csv_line(row);
  }
  return text;
}

std::string expectations_csv(const std::vector<ExpectationCheck>& checks) {
  std::string text =
      csv_line({"group_i", "group_j", "expected_sign", "delta_far", "observed_sign", "holds"});
  for (const auto& c : checks) {
    text += csv_line({c.group_i, c.group_j, std::to_string(c.expected_sign),
                      format_decimal(c.delta_far), std::to_string(c.observed_sign),
                      c.holds() ? "true" : "false"});
  }
  return text;
}

// Rows are explanatory columns in first-seen order, columns are dependents.
Heatmap correlation_map(const std::vector<ExplanatoryReport>& reports, const std::string& title) {
  Heatmap map;
  map.title = title;
  for (const auto& rep : reports) {
    map.col_labels.emplace_back(metric_name(rep.dependent));
    for (const auto& c : rep.correlations) {
      if (std::find(map.row_labels.begin(), map.row_labels.end(), c.column) == map.row_labels.end()) {
        map.row_labels.push_back(c.column);
      }
    }
  }
  const double nan = std::nan("");
  map.values.assign(map.row_labels.size() * map.col_labels.size(), nan);
  map.p_values = map.values;
  for (std::size_t col = 0; col < reports.size(); ++col) {
    for (const auto& c : reports[col].correlations) {
      if (!c.result) continue;
      const auto row = static_cast<std::size_t>(
          std::find(map.row_labels.begin(), map.row_labels.end(), c.column) - map.row_labels.begin());
      map.values[row * reports.size() + col] = c.result->r;
      map.p_values[row * reports.size() + col] = c.result->p_value;
    }
  }
  map.bound = 1.0;
  return map;
}

Heatmap regression_map(const std::vector<ExplanatoryReport>& reports, const std::string& title) {
  Heatmap map;
  map.title = title;
  for (const auto& rep : reports) {
    map.col_labels.emplace_back(metric_name(rep.dependent));
    const auto& names = rep.regression.fit.column_names;
    for (std::size_t k = 1; k < names.size(); ++k) {
      if (std::find(map.row_labels.begin(), map.row_labels.end(), names[k]) == map.row_labels.end()) {
        map.row_labels.push_back(names[k]);
      }
    }
  }
  const double nan = std::nan("");
  map.values.assign(map.row_labels.size() * map.col_labels.size(), nan);
  map.p_values = map.values;
  for (std::size_t col = 0; col < reports.size(); ++col) {
    const auto& fit = reports[col].regression.fit;
    for (std::size_t k = 1; k < fit.column_names.size(); ++k) {
      const auto row = static_cast<std::size_t>(
          std::find(map.row_labels.begin(), map.row_labels.end(), fit.column_names[k]) -
          map.row_labels.begin());
      map.values[row * reports.size() + col] = fit.coefficients[k];
      map.p_values[row * reports.size() + col] = fit.p_values[k];
    }
  }
  return map;
}

Heatmap kruskal_map(const PValueMatrix& m, const std::string& title) {
  Heatmap map;
  map.title = title;
  map.row_labels = m.labels;
  map.col_labels = m.labels;
  map.values = m.p_values;
  map.p_values = m.p_values;
  for (std::size_t i = 0; i < m.size(); ++i) map.p_values[i * m.size() + i] = std::nan("");
  map.scale = ColorScale::kSequential;
  return map;
}

}  // namespace

std::string format_decimal(double value, int precision) {
  if (std::isnan(value)) return kMissing;
  return fmt::format("{:.{}f}", value, precision);
}

std::string format_p_value(double p) {
  if (std::isnan(p)) return kMissing;
  return fmt::format("{:.3g}", p);
}

std::string render_group_table(const GroupRatesResult& groups, const AttributeSchema& schema,
                               Metric metric) {
  const auto& spec = groups.spec;
  if (spec.attributes.empty()) return {};
  const std::size_t first = spec.attribute_index.front();
  const std::size_t n_rows = schema.at(first).kind.levels.size() + 1;

  GroupSpec tail_spec;
  tail_spec.attributes.assign(spec.attributes.begin() + 1, spec.attributes.end());
  tail_spec.attribute_index.assign(spec.attribute_index.begin() + 1, spec.attribute_index.end());

  std::vector<GroupKey> tails;
  for (const auto& g : groups.groups) {
    GroupKey tail{{g.key.levels.begin() + 1, g.key.levels.end()}};
    if (std::find(tails.begin(), tails.end(), tail) == tails.end()) tails.push_back(tail);
  }
  std::vector<std::vector<std::string>> cells(n_rows, std::vector<std::string>(tails.size(), kMissing));
  for (const auto& g : groups.groups) {
    const auto& head = g.key.levels.front();
    const std::size_t row = head ? static_cast<std::size_t>(*head) : n_rows - 1;
    GroupKey tail{{g.key.levels.begin() + 1, g.key.levels.end()}};
    const auto col = static_cast<std::size_t>(std::find(tails.begin(), tails.end(), tail) - tails.begin());
    if (g.defined()) cells[row][col] = format_decimal(g.value(metric));
  }

  std::vector<std::string> header;
  if (tail_spec.attributes.empty()) {
    header = {spec.attributes.front(), std::string(metric_name(metric))};
  } else {
    std::string corner = spec.attributes.front();
    for (const auto& a : tail_spec.attributes) corner += "/" + a;
    header.push_back(corner);
    for (const auto& t : tails) header.push_back(group_label(tail_spec, schema, t));
  }
  std::string text = csv_line(header);
  for (std::size_t row = 0; row < n_rows; ++row) {
    std::optional<int> level;
    if (row + 1 < n_rows) level = static_cast<int>(row);
    std::vector<std::string> fields{level_or_union(schema, first, level)};
    fields.insert(fields.end(), cells[row].begin(), cells[row].end());
    text += csv_line(fields);
  }
  return text;
}

Rgb scale_color(double value, ColorScale scale, double bound) {
  if (!std::isfinite(value)) return {200, 200, 200};
  const Rgb white{255, 255, 255};
  if (scale == ColorScale::kSequential) {
    return blend({8, 48, 107}, white, std::clamp(value, 0.0, 1.0));
  }
  const double t = bound > 0.0 ? std::clamp(value / bound, -1.0, 1.0) : 0.0;
  if (t < 0.0) return blend(white, {33, 102, 172}, -t);
  return blend(white, {178, 24, 43}, t);
}

std::string hex_color(Rgb color) {
  return fmt::format("#{:02x}{:02x}{:02x}", color.r, color.g, color.b);
}

std::string render_heatmap_svg(const Heatmap& map) {
  const std::size_t rows = map.row_labels.size();
  const std::size_t cols = map.col_labels.size();
  if (map.values.size() != rows * cols || map.p_values.size() != rows * cols) {
    throw_data("report", fmt::format("heatmap shape mismatch: {}x{} labels, {} values, {} p-values",
                                     rows, cols, map.values.size(), map.p_values.size()));
  }
  double bound = map.bound;
  if (map.scale == ColorScale::kDiverging && bound <= 0.0) {
    bound = 0.0;
    for (double v : map.values) {
      if (std::isfinite(v)) bound = std::max(bound, std::fabs(v));
    }
    if (bound == 0.0) bound = 1.0;
  }

  std::size_t row_chars = 0;
  for (const auto& l : map.row_labels) row_chars = std::max(row_chars, code_points(l));
  std::size_t col_chars = 0;
  for (const auto& l : map.col_labels) col_chars = std::max(col_chars, code_points(l));
  const int left = kPad + static_cast<int>(row_chars) * kCharWidth + kPad;
  const int top = 2 * kPad + 14 + static_cast<int>(col_chars) * kCharWidth * 7 / 10;
  const int grid_w = static_cast<int>(cols) * kCellWidth;
  const int grid_h = static_cast<int>(rows) * kCellHeight;
  const int width = left + grid_w + kPad + 90;
  const int height = top + grid_h + kPad + 28;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height);
  svg += fmt::format("<title>{}</title>\n", xml_escape(map.title));
  svg += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width,
                     height);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"13\">{}</text>\n", kPad, kPad + 10,
                     xml_escape(map.title));
  for (std::size_t c = 0; c < cols; ++c) {
    const int x = left + static_cast<int>(c) * kCellWidth + kCellWidth / 2;
    svg += fmt::format(
        "<text class=\"col-label\" x=\"{0}\" y=\"{1}\" transform=\"rotate(-45 {0} {1})\">{2}</text>\n",
        x, top - 6, xml_escape(map.col_labels[c]));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const int y = top + static_cast<int>(r) * kCellHeight;
    svg += fmt::format(
        "<text class=\"row-label\" x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", left - 6,
        y + kCellHeight / 2 + 4, xml_escape(map.row_labels[r]));
    for (std::size_t c = 0; c < cols; ++c) {
      const int x = left + static_cast<int>(c) * kCellWidth;
      const double v = map.values[r * cols + c];
      const double p = map.p_values[r * cols + c];
      svg += fmt::format(
          "<g class=\"cell\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" "
          "stroke=\"#ffffff\"/><title>{} / {}: {} (p = {})</title>",
          x, y, kCellWidth, kCellHeight, hex_color(scale_color(v, map.scale, bound)),
          xml_escape(map.row_labels[r]), xml_escape(map.col_labels[c]), format_decimal(v),
          format_p_value(p));
      if (p < 0.05) {
        svg += fmt::format("<text class=\"glyph-o\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">o</text>",
                           x + kCellWidth / 2 - 6, y + kCellHeight / 2 + 4);
      }
      if (p < 0.01) {
        svg += fmt::format(
            "<text class=\"glyph-backslash\" x=\"{}\" y=\"{}\" text-anchor=\"middle\">\\</text>",
            x + kCellWidth / 2 + 6, y + kCellHeight / 2 + 4);
      }
      svg += "</g>\n";
    }
  }
  // Legend: three swatches at the scale ends and midpoint.
  const int lx = left + grid_w + kPad;
  const double lo = map.scale == ColorScale::kSequential ? 0.0 : -bound;
  const double hi = map.scale == ColorScale::kSequential ? 1.0 : bound;
  const double stops[3] = {hi, 0.5 * (lo + hi), lo};
  for (int i = 0; i < 3; ++i) {
    const int y = top + i * kCellHeight;
    svg += fmt::format(
        "<rect class=\"legend\" x=\"{}\" y=\"{}\" width=\"14\" height=\"{}\" fill=\"{}\"/>"
        "<text x=\"{}\" y=\"{}\">{}</text>\n",
        lx, y, kCellHeight, hex_color(scale_color(stops[i], map.scale, bound)), lx + 18,
        y + kCellHeight / 2 + 4, format_decimal(stops[i]));
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\">o p &lt; 0.05   \\ p &lt; 0.01</text>\n", kPad,
                     top + grid_h + kPad + 12);
  svg += "</svg>\n";
  return svg;
}

std::string bundle_json_text(const AuditBundle& bundle) {
  return nlohmann::json(bundle).dump(2) + "\n";
}

void emit_bundle(const AuditBundle& bundle, const AttributeSchema& schema,
                 const std::filesystem::path& dir) {
  if (bundle.operating_points.empty()) {
    throw_data("report", "bundle has no completed analysis");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir / "tables", ec);
  if (!ec) std::filesystem::create_directories(dir / "figures", ec);
  if (ec) throw_data("report", fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  write_file(dir / "report.json", bundle_json_text(bundle));
  for (const auto& op : bundle.operating_points) {
    const std::string slug = op.operating_point.policy.slug();
    const std::string name = op.operating_point.policy.name();
    const auto tables = dir / "tables";
    const auto figures = dir / "figures";
    for (Metric m : {Metric::kFar, Metric::kFrr}) {
      const std::string metric(metric_name(m));
      write_file(tables / fmt::format("group_{}_{}.csv", metric, slug),
                 render_group_table(op.groups, schema, m));
    }
    write_file(tables / fmt::format("deltas_{}.csv", slug), deltas_csv(op.deltas));
    for (const auto* k : {&op.kruskal_far, &op.kruskal_frr}) {
      if (!*k) continue;
      const std::string metric(metric_name((*k)->metric));
      write_file(tables / fmt::format("kruskal_{}_{}.csv", metric, slug), kruskal_csv(**k));
      write_file(figures / fmt::format("kruskal_{}_{}.svg", metric, slug),
                 render_heatmap_svg(kruskal_map(
                     **k, fmt::format("Kruskal-Wallis p-values, {} ({})", metric, name))));
    }
    if (!op.expectation_checks.empty()) {
      write_file(tables / fmt::format("expectations_{}.csv", slug),
                 expectations_csv(op.expectation_checks));
    }
    if (!op.explanations.empty()) {
      write_file(tables / fmt::format("correlations_{}.csv", slug), correlations_csv(op.explanations));
      for (const auto& rep : op.explanations) {
        write_file(tables / fmt::format("regression_{}_{}.csv", metric_name(rep.dependent), slug),
                   regression_csv(rep));
      }
      write_file(figures / fmt::format("correlation_{}.svg", slug),
                 render_heatmap_svg(correlation_map(
                     op.explanations, fmt::format("Pearson correlation ({})", name))));
      write_file(figures / fmt::format("regression_{}.svg", slug),
                 render_heatmap_svg(regression_map(
                     op.explanations, fmt::format("Regression coefficients ({})", name))));
    }
  }
}

}  // namespace fairaudit::report
