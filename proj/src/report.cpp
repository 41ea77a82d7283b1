#include "ellfit/report.hpp"

#include "ellfit/common.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace ellfit {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "singular_matrix";
    case ErrorCode::DegenerateScalars: return "degenerate_scalars";
    case ErrorCode::DivergentSeries: return "divergent_series";
    case ErrorCode::SizeLimit: return "size_limit";
    case ErrorCode::UnknownShape: return "unknown_shape";
    case ErrorCode::NonSymmetric: return "non_symmetric";
    case ErrorCode::DimensionTooSmall: return "dimension_too_small";
  }
  return "unknown";
}

}  // namespace ellfit

namespace ellfit::report {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json to_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
        }
        return v;
      },
      cell);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw std::invalid_argument("table " + name + ": row width mismatch");
  }
  rows.push_back(std::move(row));
}

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw std::invalid_argument("unknown format '" + text + "' (expected csv or json)");
}

Table& Report::table(const std::string& name) {
  for (auto& t : tables) {
    if (t.name == name) return t;
  }
  throw std::invalid_argument("report has no table " + name);
}

std::string format_cell(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          if (std::isnan(v)) return "nan";
          if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.17g", v);
          return buf;
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

void write_csv(std::ostream& out, const Report& rep) {
  const bool sections = rep.tables.size() > 1;
  bool first = true;
  for (const auto& t : rep.tables) {
    if (sections) {
      if (!first) out << '\n';
      out << "# " << t.name << '\n';
    }
    first = false;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      out << (c ? "," : "") << csv_escape(t.columns[c]);
    }
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        out << (c ? "," : "") << csv_escape(format_cell(row[c]));
      }
      out << '\n';
    }
  }
  if (rep.interrupted) out << "# interrupted: partial results\n";
  for (const auto& w : rep.warnings) out << "# warning: " << w << '\n';
}

void write_json(std::ostream& out, const Report& rep) {
  ordered_json doc;
  doc["schema"] = rep.schema();
  ordered_json config = ordered_json::object();
  for (const auto& [key, value] : rep.config) config[key] = to_json(value);
  doc["config"] = config;
  for (const auto& t : rep.tables) {
    ordered_json rows = ordered_json::array();
    for (const auto& row : t.rows) {
      ordered_json obj = ordered_json::object();
      for (std::size_t c = 0; c < row.size(); ++c) obj[t.columns[c]] = to_json(row[c]);
      rows.push_back(std::move(obj));
    }
    doc[t.name] = std::move(rows);
  }
  doc["interrupted"] = rep.interrupted;
  doc["warnings"] = rep.warnings;
  out << doc.dump(2) << '\n';
}

void write(std::ostream& out, const Report& rep, Format format) {
  if (format == Format::Csv) {
    write_csv(out, rep);
  } else {
    write_json(out, rep);
  }
}

}  // namespace ellfit::report
