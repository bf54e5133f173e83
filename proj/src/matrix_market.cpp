#include "sp2bench/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sp2bench/error.hpp"

namespace sp2bench::mm {

namespace {

struct Entry {
  std::size_t row;
  std::size_t col;
  double value;
};

struct Coordinate {
  std::size_t n = 0;
  Symmetry sym = Symmetry::general;
  std::vector<Entry> entries;  // mirrored, sorted by (row, col), duplicates summed
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, const char* what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) throw ParseError(what, std::string(tok));
  return v;
}

Coordinate parse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market stream", "");
  const auto header = split(line);
  if (header.size() != 5 || header[0] != "%%MatrixMarket")
    throw ParseError("bad Matrix Market banner", line);
  if (lower(header[1]) != "matrix" || lower(header[2]) != "coordinate")
    throw ParseError("only 'matrix coordinate' is supported", line);
  const std::string field = lower(header[3]);
  if (field != "real" && field != "integer" && field != "double")
    throw ParseError("unsupported field", std::string(header[3]));
  Coordinate c;
  const std::string sym = lower(header[4]);
  if (sym == "general")
    c.sym = Symmetry::general;
  else if (sym == "symmetric")
    c.sym = Symmetry::symmetric;
  else
    throw ParseError("unsupported symmetry", std::string(header[4]));

  std::size_t rows = 0, cols = 0, nnz = 0;
  bool have_size = false;
  std::size_t read = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (!have_size) {
      if (tok.size() != 3) throw ParseError("bad size line", line);
      rows = parse_number<std::size_t>(tok[0], "bad row count");
      cols = parse_number<std::size_t>(tok[1], "bad column count");
      nnz = parse_number<std::size_t>(tok[2], "bad entry count");
      if (rows != cols)
        throw DimensionMismatch("only square matrices are supported, got " + std::to_string(rows) +
                                "x" + std::to_string(cols));
      c.n = rows;
      c.entries.reserve(c.sym == Symmetry::symmetric ? 2 * nnz : nnz);
      have_size = true;
      continue;
    }
    if (tok.size() != 3) throw ParseError("bad entry line", line);
    const auto i = parse_number<std::size_t>(tok[0], "bad row index");
    const auto j = parse_number<std::size_t>(tok[1], "bad column index");
    const auto v = parse_number<double>(tok[2], "bad value");
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("index out of range", line);
    c.entries.push_back({i - 1, j - 1, v});
    if (c.sym == Symmetry::symmetric && i != j) c.entries.push_back({j - 1, i - 1, v});
    ++read;
  }
  if (!have_size) throw ParseError("missing size line", "");
  if (read != nnz)
    throw ParseError("entry count mismatch", std::to_string(read) + " of " + std::to_string(nnz));

  std::stable_sort(c.entries.begin(), c.entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Entry> merged;
  merged.reserve(c.entries.size());
  for (const auto& e : c.entries) {
    if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
      merged.back().value += e.value;
    else
      merged.push_back(e);
  }
  c.entries = std::move(merged);
  return c;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot create " + path.string());
  return out;
}

void put_entry(std::ostream& out, std::size_t i, std::size_t j, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out << (i + 1) << ' ' << (j + 1) << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf))
      << '\n';
}

void put_header(std::ostream& out, Symmetry sym, std::size_t n, std::size_t nnz) {
  out << "%%MatrixMarket matrix coordinate real "
      << (sym == Symmetry::symmetric ? "symmetric" : "general") << '\n';
  out << n << ' ' << n << ' ' << nnz << '\n';
}

}  // namespace

DenseMatrix read_dense(std::istream& in) {
  const Coordinate c = parse(in);
  DenseMatrix d(c.n);
  for (const auto& e : c.entries) d(e.row, e.col) = e.value;
  return d;
}

DenseMatrix read_dense(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_dense(in);
}

EllpackMatrix read_ellpack(std::istream& in, double threshold, std::size_t m_max,
                           const ExecContext& ctx) {
  const Coordinate c = parse(in);
  std::vector<std::size_t> first(c.n + 1, 0);
  std::vector<Entry> kept;
  kept.reserve(c.entries.size());
  for (const auto& e : c.entries)
    if (std::fabs(e.value) > threshold) kept.push_back(e);
  for (const auto& e : kept) ++first[e.row + 1];
  std::size_t widest = 0;
  for (std::size_t i = 0; i < c.n; ++i) {
    widest = std::max(widest, first[i + 1]);
    first[i + 1] += first[i];
  }
  const std::size_t width = m_max == 0 ? widest : m_max;
  for (std::size_t i = 0; i < c.n; ++i) {
    const std::size_t k = first[i + 1] - first[i];
    if (k > width) throw OverflowError(i, k, width);
  }
  EllpackMatrix a(c.n, width, ctx);
  RowWriter out(a);
  ctx.workers().parallel_for(c.n, [&](std::size_t lo, std::size_t hi, std::size_t) {
    for (std::size_t i = lo; i < hi; ++i) {
      std::size_t k = 0;
      for (std::size_t p = first[i]; p < first[i + 1]; ++p, ++k) {
        out.values(i)[k] = kept[p].value;
        out.cols(i)[k] = static_cast<Index>(kept[p].col);
      }
      out.set_nnz(i, k);
    }
  });
  return a;
}

EllpackMatrix read_ellpack(const std::filesystem::path& path, double threshold, std::size_t m_max,
                           const ExecContext& ctx) {
  auto in = open_in(path);
  return read_ellpack(in, threshold, m_max, ctx);
}

void write(std::ostream& out, const DenseMatrix& d, Symmetry sym) {
  const std::size_t n = d.n();
  if (sym == Symmetry::symmetric && !d.is_symmetric(0.0))
    throw InvalidArgument("symmetric storage requested for a non-symmetric matrix");
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < (sym == Symmetry::symmetric ? i + 1 : n); ++j)
      if (d(i, j) != 0.0) ++nnz;
  put_header(out, sym, n, nnz);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < (sym == Symmetry::symmetric ? i + 1 : n); ++j)
      if (d(i, j) != 0.0) put_entry(out, i, j, d(i, j));
  if (!out) throw IoError("write failed");
}

void write(const std::filesystem::path& path, const DenseMatrix& d, Symmetry sym) {
  auto out = open_out(path);
  write(out, d, sym);
}

void write(std::ostream& out, const EllpackMatrix& a, Symmetry sym) {
  const std::size_t n = a.n();
  std::size_t nnz = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t s = 0; s < cols.size(); ++s) {
      const auto j = static_cast<std::size_t>(cols[s]);
      if (sym == Symmetry::symmetric) {
        if (a.at(j, i) != vals[s])
          throw InvalidArgument("symmetric storage requested for a non-symmetric matrix");
        if (j > i) continue;
      }
      if (vals[s] != 0.0) ++nnz;
    }
  }
  put_header(out, sym, n, nnz);
  for (std::size_t i = 0; i < n; ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t s = 0; s < cols.size(); ++s) {
      const auto j = static_cast<std::size_t>(cols[s]);
      if (sym == Symmetry::symmetric && j > i) continue;
      if (vals[s] != 0.0) put_entry(out, i, j, vals[s]);
    }
  }
  if (!out) throw IoError("write failed");
}

void write(const std::filesystem::path& path, const EllpackMatrix& a, Symmetry sym) {
  auto out = open_out(path);
  write(out, a, sym);
}

}  // namespace sp2bench::mm
