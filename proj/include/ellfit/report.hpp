#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace ellfit::report {

using Cell = std::variant<std::string, std::int64_t, std::uint64_t, double, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Appends a row; throws std::invalid_argument on a width mismatch.
  void add(std::vector<Cell> row);
};

enum class Format { Csv, Json };

Format parse_format(const std::string& text);

/// Schema-versioned output: config echo, one or more tables, warnings.
struct Report {
  std::string kind;
  std::vector<std::pair<std::string, Cell>> config;
  std::vector<Table> tables;
  std::vector<std::string> warnings;
  bool interrupted = false;

  std::string schema() const { return "ellfit." + kind + "/1"; }
  Table& table(const std::string& name);
};

/// Doubles are written with 17 significant digits so they round-trip.
std::string format_cell(const Cell& cell);

/// CSV: a header line and one line per row. Reports with several tables
/// emit each as a block introduced by "# <table name>". Warnings follow as
/// "# warning: ..." lines.
void write_csv(std::ostream& out, const Report& rep);

void write_json(std::ostream& out, const Report& rep);

void write(std::ostream& out, const Report& rep, Format format);

}  // namespace ellfit::report
