#pragma once

// Plain-text file formats.
//
//   matrix / vector   "rows cols" header, then one whitespace-separated row per
//                     line. Vectors are written as n x 1 and read from either
//                     n x 1 or 1 x n.
//   mask              "p n m_obs" header, then "row col value" per line, 1-based.
//   groups            JSON list of index lists, 1-based: [[1,2],[3,4,5]].
//
// Writers go through write_file_atomic so a failed run never leaves a
// partially written file behind.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "acciht/errors.hpp"
#include "acciht/numerics.hpp"
#include "acciht/objectives.hpp"
#include "json.hpp"

namespace acciht::io {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading " + path.string());
  return ss.str();
}

/// Writes to a sibling temporary file, then renames over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("error writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place at " + path.string());
  }
}

inline std::ostream& full_precision(std::ostream& os) {
  return os << std::setprecision(std::numeric_limits<double>::max_digits10);
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  full_precision(os);
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << m(i, j);
    }
    os << '\n';
  }
}

inline std::string format_matrix(const Matrix& m) {
  std::ostringstream ss;
  write_matrix(ss, m);
  return ss.str();
}

inline Matrix read_matrix(std::istream& is, const std::string& source = "<stream>") {
  long long rows = -1, cols = -1;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0)
    throw ValidationError(source + ": expected a 'rows cols' header");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      std::string tok;
      if (!(is >> tok)) throw ValidationError(source + ": too few entries");
      try {
        std::size_t used = 0;
        m(i, j) = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw ValidationError(source + ": malformed number '" + tok + "'");
      }
    }
  std::string extra;
  if (is >> extra) throw ValidationError(source + ": trailing data after " + std::to_string(rows * cols) + " entries");
  if (!all_finite(m)) throw ValidationError(source + ": non-finite entries");
  return m;
}

inline Matrix load_matrix(const std::filesystem::path& path) {
  std::istringstream ss(read_file(path));
  return read_matrix(ss, path.string());
}

inline Vector load_vector(const std::filesystem::path& path) {
  Matrix m = load_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw ValidationError(path.string() + ": expected a vector (n x 1 or 1 x n)");
}

inline std::string format_vector(const Vector& v) { return format_matrix(v); }

// --- mask files ---

inline std::string format_mask(const MaskedLeastSquares& obj) {
  std::ostringstream ss;
  full_precision(ss);
  ss << obj.rows() << ' ' << obj.cols() << ' ' << obj.observed_count() << '\n';
  const auto& pos = obj.positions();
  for (std::size_t t = 0; t < pos.size(); ++t)
    ss << pos[t].row + 1 << ' ' << pos[t].col + 1 << ' ' << obj.observations()(static_cast<Index>(t)) << '\n';
  return ss.str();
}

inline MaskedLeastSquares parse_mask(std::istream& is, const std::string& source = "<stream>") {
  long long p = 0, n = 0, m = -1;
  if (!(is >> p >> n >> m) || p < 1 || n < 1 || m < 0)
    throw ValidationError(source + ": expected a 'p n m_obs' header");
  std::vector<MaskEntry> pos;
  pos.reserve(static_cast<std::size_t>(m));
  Vector values(m);
  for (long long t = 0; t < m; ++t) {
    long long r = 0, c = 0;
    double v = 0.0;
    if (!(is >> r >> c >> v)) throw ValidationError(source + ": malformed observation line " + std::to_string(t + 2));
    if (r < 1 || r > p || c < 1 || c > n) throw ValidationError(source + ": position out of range (1-based)");
    pos.push_back({r - 1, c - 1});
    values(t) = v;
  }
  std::string extra;
  if (is >> extra) throw ValidationError(source + ": more observations than the header declares");
  return MaskedLeastSquares(p, n, std::move(pos), std::move(values));
}

inline MaskedLeastSquares load_mask(const std::filesystem::path& path) {
  std::istringstream ss(read_file(path));
  return parse_mask(ss, path.string());
}

// --- group partitions ---

inline std::vector<std::vector<Index>> parse_groups(const std::string& text, const std::string& source = "<groups>") {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(source + ": " + e.what());
  }
  if (!j.is_array()) throw ValidationError(source + ": expected a list of index lists");
  std::vector<std::vector<Index>> groups;
  for (const auto& g : j) {
    if (!g.is_array()) throw ValidationError(source + ": each group must be a list");
    std::vector<Index> idx;
    for (const auto& v : g) {
      if (!v.is_number_integer() || v.get<long long>() < 1)
        throw ValidationError(source + ": group indices must be positive integers (1-based)");
      idx.push_back(v.get<Index>() - 1);
    }
    groups.push_back(std::move(idx));
  }
  return groups;
}

inline std::string format_groups(const std::vector<std::vector<Index>>& groups) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& g : groups) {
    nlohmann::json row = nlohmann::json::array();
    for (Index i : g) row.push_back(i + 1);
    j.push_back(row);
  }
  return j.dump() + "\n";
}

} // namespace acciht::io
