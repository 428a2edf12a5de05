#pragma once

// Plain-text formats: CSV matrices and flat "key = value" config files.
// Floats are written with 12 significant digits.

#include "ldinfomax/types.hpp"

#include <charconv>
#include <concepts>
#include <cstdint>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace ldinfomax::io {

inline constexpr int kFloatDigits = 12;

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(kFloatDigits) << v;
  return os.str();
}

inline double parse_double(const std::string& s) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("cannot parse number '" + s + "'");
  }
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  if (pos != s.size()) throw std::runtime_error("cannot parse number '" + s + "'");
  return v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

/// Header row "c0,...,c{N-1}", then one line per matrix row.
inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << 'c' << j;
  os << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_matrix_csv(os, m);
}

/// Reads a numeric CSV matrix; a leading non-numeric header row is skipped.
inline Matrix read_matrix_csv(std::istream& is, const std::string& what = "matrix") {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (first) {
      first = false;
      try {
        parse_double(fields.front());
      } catch (const std::runtime_error&) {
        continue;  // header
      }
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(what + ": ragged CSV rows");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(what + ": empty CSV");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_matrix_csv(is, path.string());
}

/// Flat key-value document with dotted keys ("scenario.r = 5").  Lines
/// starting with '#' are comments.  Keys are kept sorted on output.
class KeyValue {
 public:
  static KeyValue parse(std::istream& is) {
    KeyValue kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
      }
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key");
      kv.values_[key] = trim(t.substr(eq + 1));
    }
    return kv;
  }

  static KeyValue load(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config '" + path.string() + "'");
    return parse(is);
  }

  void write(std::ostream& os) const {
    for (const auto& [k, v] : values_) os << k << " = " << v << '\n';
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write(os);
  }

  [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
  [[nodiscard]] const std::map<std::string, std::string>& values() const { return values_; }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void set(const std::string& key, double value) { values_[key] = format_double(value); }
  template <std::integral T>
  void set(const std::string& key, T value) {
    values_[key] = std::to_string(value);
  }

  [[nodiscard]] std::string get(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }
  [[nodiscard]] double get(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second);
  }
  [[nodiscard]] long long get_int(const std::string& key, long long fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v = 0;
    const auto& s = it->second;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw std::runtime_error("config key '" + key + "': expected an integer, got '" + s + "'");
    }
    return v;
  }
  [[nodiscard]] std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::uint64_t v = 0;
    const auto& s = it->second;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) {
      throw std::runtime_error("config key '" + key + "': expected an unsigned integer, got '" + s + "'");
    }
    return v;
  }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace ldinfomax::io
