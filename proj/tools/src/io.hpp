#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenario.hpp"
#include "tradegrowth/model.hpp"

namespace tradegrowth::cli {

// 12 significant digits, shortest form; "nan"/"inf" never reach a file.
std::string format_number(double x);

// x rounded to 12 significant digits, or null when not finite.
nlohmann::json json_number(double x);

// A rectangular table of JSON scalars, written as CSV or as an array of
// records. Column order is fixed by the header.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<nlohmann::json> row);
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<nlohmann::json>>& rows() const { return rows_; }

  std::string to_csv() const;
  nlohmann::json to_json() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<nlohmann::json>> rows_;
};

// Long-format matrix table with columns source,dest,value.
Table matrix_table(const Matrix& m, const std::vector<std::string>& labels);

// Same, after checking that every column sums to one.
Table share_table(const Matrix& shares, const std::vector<std::string>& labels);

// Writes name.csv or name.json under dir.
void write_table(const std::filesystem::path& dir, const std::string& name, const Table& table, OutputFormat format);

// Two-space indented JSON with floats printed by format_number.
std::string dump_json(const nlohmann::json& value);

void write_json(const std::filesystem::path& path, const nlohmann::json& value);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace tradegrowth::cli
