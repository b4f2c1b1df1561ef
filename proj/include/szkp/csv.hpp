#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace szkp {

inline constexpr std::string_view kCsvMagic = "# szkp-csv v1 ";

/// Versioned CSV: a `# szkp-csv v1 <kind>` line, a column header, rows.
/// Fields containing commas or quotes are quoted with "" escapes.
struct CsvTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> r) {
    if (r.size() != columns.size()) {
      throw std::invalid_argument("CSV row has " + std::to_string(r.size()) + " fields, expected " +
                                  std::to_string(columns.size()));
    }
    rows.push_back(std::move(r));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw std::out_of_range("no CSV column '" + name + "'");
  }

  std::string str() const {
    std::string out(kCsvMagic);
    out += kind;
    out += '\n';
    write_line(out, columns);
    for (const auto& r : rows) write_line(out, r);
    return out;
  }

  void save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << str();
  }

  static CsvTable parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || !line.starts_with(kCsvMagic)) {
      throw std::invalid_argument("missing szkp-csv v1 header line");
    }
    CsvTable t;
    t.kind = line.substr(kCsvMagic.size());
    if (!std::getline(in, line)) throw std::invalid_argument("missing CSV column header");
    t.columns = split_line(line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      t.add_row(split_line(line));
    }
    return t;
  }

  static CsvTable load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
  }

 private:
  static void write_line(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      const auto& f = fields[i];
      if (f.find_first_of(",\"\n") == std::string::npos) {
        out += f;
        continue;
      }
      out += '"';
      for (char c : f) {
        if (c == '"') out += '"';
        out += c;
      }
      out += '"';
    }
    out += '\n';
  }

  static std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          out.back() += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        out.emplace_back();
      } else if (c != '\r') {
        out.back() += c;
      }
    }
    if (quoted) throw std::invalid_argument("unterminated quote in CSV line");
    return out;
  }
};

/// Nine significant digits in a fixed format, byte-stable across runs.
inline std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace szkp
