#include "cli/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kpod/error.hpp"

namespace kpod::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  throw Error(Errc::usage, "unknown format '" + s + "' (expected csv or json)");
}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) throw Error(Errc::dimension, "table row width differs from the header");
  rows_.push_back(std::move(row));
}

void Table::write_csv(std::ostream& out) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) out << (i ? "," : "") << columns_[i];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              out << format_number(v);
            else
              out << v;
          },
          row[i]);
    }
    out << '\n';
  }
}

nlohmann::json Table::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              if (std::isfinite(v))
                r[columns_[i]] = v;
              else
                r[columns_[i]] = nullptr;
            } else {
              r[columns_[i]] = v;
            }
          },
          row[i]);
    }
    rows.push_back(std::move(r));
  }
  return {{"columns", columns_}, {"rows", std::move(rows)}};
}

void Table::write(std::ostream& out, Format format) const {
  if (format == Format::csv)
    write_csv(out);
  else
    out << to_json().dump(2) << '\n';
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(Errc::io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

}  // namespace kpod::cli
