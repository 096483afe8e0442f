#include "skewlink/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace skewlink::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool try_parse(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

}  // namespace

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  Csv csv;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool saw_header_or_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_line(line);
    if (!saw_header_or_data) {
      saw_header_or_data = true;
      double v;
      if (!try_parse(cells[0], &v)) {
        csv.header = cells;
        continue;
      }
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      if (!try_parse(cells[c], &v))
        throw ValidationError(path + ": non-numeric cell at row " +
                              std::to_string(lineno) + ", column " +
                              std::to_string(c + 1) + ": '" + cells[c] + "'");
      if (std::isnan(v))
        throw ValidationError(path + ": NaN cell at row " + std::to_string(lineno) +
                              ", column " + std::to_string(c + 1));
      row[c] = v;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ValidationError(path + ": ragged row at line " + std::to_string(lineno));
    if (!csv.header.empty() && row.size() != csv.header.size())
      throw ValidationError(path + ": ragged row at line " + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(path + ": no data rows");
  csv.values.resize(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) csv.values(r, c) = rows[r][c];
  return csv;
}

void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& header, const Matrix& values) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c)
      out << format_double(values(r, c)) << (c + 1 < values.cols() ? "," : "\n");
  }
  if (!out) throw ValidationError("write failed: " + path);
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto h = line.find('#');
    if (h != std::string::npos) line = line.substr(0, h);
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ": expected key=value at line " +
                            std::to_string(lineno));
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t");
      const auto y = s.find_last_not_of(" \t");
      return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError(path + ": empty key at line " + std::to_string(lineno));
    if (kv.count(key))
      throw ValidationError(path + ": duplicate key '" + key + "'");
    kv[key] = val;
  }
  return kv;
}

void write_kv(const std::string& path,
              const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write file: " + path);
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& what) {
  double v;
  if (!try_parse(s, &v)) throw ValidationError("invalid number for " + what + ": '" + s + "'");
  return v;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::string cell;
  std::stringstream ss(s);
  while (std::getline(ss, cell, ',')) out.push_back(parse_double(cell, what));
  if (out.empty()) throw ValidationError("empty list for " + what);
  return out;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

double order_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("order_quantile: empty input");
  if (!(q >= 0.0 && q < 1.0)) throw ValidationError("order_quantile: q must be in [0,1)");
  const std::size_t n = values.size();
  std::size_t k = static_cast<std::size_t>(std::ceil(q * n));
  if (k < 1) k = 1;
  std::nth_element(values.begin(), values.begin() + (k - 1), values.end());
  return values[k - 1];
}

}  // namespace skewlink::io
