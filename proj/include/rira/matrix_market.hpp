#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rira/csr.hpp"
#include "rira/errors.hpp"

namespace rira {

namespace detail {
inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}
}  // namespace detail

/// Reads a Matrix Market coordinate file (real, general or symmetric;
/// symmetric inputs are expanded to full storage). Duplicate entries are
/// summed. Rejects array format, non-real fields and non-square sizes
/// with a ParseError.
inline CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (detail::lower(tag) != "%%matrixmarket" || detail::lower(object) != "matrix")
    throw ParseError("matrix market: bad banner: " + line);
  format = detail::lower(format);
  field = detail::lower(field);
  symmetry = detail::lower(symmetry);
  if (format != "coordinate")
    throw ParseError("matrix market: unsupported format '" + format + "' (coordinate only)");
  if (field != "real")
    throw ParseError("matrix market: unsupported field '" + field + "' (real only)");
  if (symmetry != "general" && symmetry != "symmetric")
    throw ParseError("matrix market: unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '%') break;
  }
  std::istringstream size_line(line);
  long long rows = -1, cols = -1, entries = -1;
  size_line >> rows >> cols >> entries;
  if (rows <= 0 || cols <= 0 || entries < 0) throw ParseError("matrix market: bad size line");
  if (rows != cols) throw ParseError("matrix market: matrix is not square");

  std::vector<std::tuple<Index, Index, double>> triplets;
  triplets.reserve(static_cast<std::size_t>(entries));
  for (long long e = 0; e < entries; ++e) {
    long long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) throw ParseError("matrix market: truncated entry list");
    if (i < 1 || i > rows || j < 1 || j > cols)
      throw ParseError("matrix market: entry index out of range");
    triplets.emplace_back(static_cast<Index>(i - 1), static_cast<Index>(j - 1), v);
    if (symmetry == "symmetric" && i != j)
      triplets.emplace_back(static_cast<Index>(j - 1), static_cast<Index>(i - 1), v);
  }
  return CsrMatrix::from_triplets(static_cast<Index>(rows), std::move(triplets));
}

inline CsrMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("matrix market: cannot open '" + path + "'");
  return read_matrix_market(in);
}

/// Writes CSR as coordinate real general; round-trips exactly through
/// read_matrix_market.
inline void write_matrix_market(std::ostream& out, const CsrMatrix& a) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n << " " << a.n << " " << a.nnz() << "\n";
  out.precision(17);
  for (Index i = 0; i < a.n; ++i)
    for (Index p = a.row_ptr[static_cast<std::size_t>(i)]; p < a.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      out << (i + 1) << " " << (a.col_idx[static_cast<std::size_t>(p)] + 1) << " "
          << a.vals[static_cast<std::size_t>(p)] << "\n";
}

inline void write_matrix_market(const std::string& path, const CsrMatrix& a) {
  std::ofstream out(path);
  if (!out) throw ParseError("matrix market: cannot open '" + path + "' for writing");
  write_matrix_market(out, a);
}

}  // namespace rira
