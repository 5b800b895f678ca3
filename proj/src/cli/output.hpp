#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace kpod::cli {

/// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

enum class Format { csv, json };

Format parse_format(const std::string& s);

/// Column-named table; headers carry units in brackets, e.g. `time[s]`.
class Table {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> row);

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
  void write(std::ostream& out, Format format) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace kpod::cli
