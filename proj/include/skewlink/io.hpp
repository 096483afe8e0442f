#pragma once

#include "skewlink/common.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace skewlink::io {

struct Csv {
  std::vector<std::string> header;  // empty when the file has no header row
  Matrix values;
};

// Comma-separated numeric table. Lines starting with '#' are skipped; a
// non-numeric first row is treated as the header. Ragged or non-numeric
// data rows raise ValidationError with the 1-based location.
Csv read_csv(const std::string& path);

// Writes '#'-prefixed comment lines, then the header, then rows at full
// double precision.
void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& header, const Matrix& values);

// Flat key=value file; '#' comments and blank lines allowed. Duplicate keys
// are errors.
std::map<std::string, std::string> read_kv(const std::string& path);
void write_kv(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv);

std::string format_double(double v);  // shortest round-trippable (%.17g)
double parse_double(const std::string& s, const std::string& what);
std::vector<double> parse_double_list(const std::string& s, const std::string& what);

std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t v);

// Order-statistic quantile: the ceil(q*n)-th smallest value (1-based),
// clamped to the first order statistic for q = 0.
double order_quantile(std::vector<double> values, double q);

}  // namespace skewlink::io
