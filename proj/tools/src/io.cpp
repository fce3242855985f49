#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tradegrowth::cli {

std::string format_number(double x) {
  if (!std::isfinite(x)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  // Negative zero would make byte-for-byte comparisons of reruns flaky.
  if (std::string(buf) == "-0") return "0";
  return buf;
}

nlohmann::json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  const std::string s = format_number(x);
  return std::strtod(s.c_str(), nullptr);
}

void Table::add_row(std::vector<nlohmann::json> row) {
  if (row.size() != header_.size()) throw std::logic_error("row width does not match the table header");
  for (auto& cell : row) {
    if (cell.is_number_float()) cell = json_number(cell.get<double>());
  }
  rows_.push_back(std::move(row));
}

namespace {

std::string csv_cell(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number()) return v.dump();
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + '"';
}

}  // namespace

std::string Table::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i) out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i]);
    out << '\n';
  }
  return out.str();
}

nlohmann::json Table::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows_) {
    nlohmann::json rec = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) rec[header_[i]] = row[i];
    arr.push_back(std::move(rec));
  }
  return arr;
}

Table matrix_table(const Matrix& m, const std::vector<std::string>& labels) {
  Table t({"source", "dest", "value"});
  for (Eigen::Index s = 0; s < m.rows(); ++s) {
    for (Eigen::Index d = 0; d < m.cols(); ++d) {
      t.add_row({labels[static_cast<std::size_t>(s)], labels[static_cast<std::size_t>(d)], m(s, d)});
    }
  }
  return t;
}

Table share_table(const Matrix& shares, const std::vector<std::string>& labels) {
  for (Eigen::Index d = 0; d < shares.cols(); ++d) {
    const double sum = shares.col(d).sum();
    if (!(std::abs(sum - 1.0) < 1e-9)) {
      throw std::logic_error("share column " + labels[static_cast<std::size_t>(d)] + " sums to " +
                             format_number(sum));
    }
  }
  return matrix_table(shares, labels);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

namespace {

// nlohmann's float printer is not always shortest, so floats go through
// format_number and everything else through dump().
void dump_to(std::string& out, const nlohmann::json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  if (v.is_number_float()) {
    const std::string s = format_number(v.get<double>());
    out += s.empty() ? "null" : s;
  } else if (v.is_object() && !v.empty()) {
    out += "{\n";
    bool first = true;
    for (const auto& [key, item] : v.items()) {
      if (!first) out += ",\n";
      first = false;
      out += pad + nlohmann::json(key).dump() + ": ";
      dump_to(out, item, depth + 1);
    }
    out += "\n" + close + "}";
  } else if (v.is_array() && !v.empty()) {
    out += "[\n";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i > 0) out += ",\n";
      out += pad;
      dump_to(out, v[i], depth + 1);
    }
    out += "\n" + close + "]";
  } else {
    out += v.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::json& value) {
  std::string out;
  dump_to(out, value, 0);
  return out;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text(path, dump_json(value) + "\n");
}

void write_table(const std::filesystem::path& dir, const std::string& name, const Table& table,
                 OutputFormat format) {
  if (format == OutputFormat::Csv) {
    write_text(dir / (name + ".csv"), table.to_csv());
  } else {
    write_json(dir / (name + ".json"), table.to_json());
  }
}

}  // namespace tradegrowth::cli
