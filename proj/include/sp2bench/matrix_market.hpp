#pragma once

#include <filesystem>
#include <iosfwd>

#include "sp2bench/dense_matrix.hpp"
#include "sp2bench/ellpack.hpp"

namespace sp2bench::mm {

// Matrix Market coordinate format, real field, general or symmetric storage.
// Indices are 1-based on disk and 0-based in memory. A symmetric file stores
// the lower triangle (i >= j) and is mirrored on read. Duplicate coordinates
// are summed. Values are written in shortest round-trip form so a write/read
// cycle is exact.

enum class Symmetry { general, symmetric };

DenseMatrix read_dense(std::istream& in);
DenseMatrix read_dense(const std::filesystem::path& path);

/// Reads straight into ELLPACK without forming a dense matrix. Entries with
/// |v| <= threshold are dropped. m_max is the widest row kept, or the given
/// width when nonzero (OverflowError if a row does not fit).
EllpackMatrix read_ellpack(std::istream& in, double threshold = 0.0, std::size_t m_max = 0,
                           const ExecContext& ctx = {});
EllpackMatrix read_ellpack(const std::filesystem::path& path, double threshold = 0.0,
                           std::size_t m_max = 0, const ExecContext& ctx = {});

/// Writes nonzero entries. Symmetry::symmetric writes the lower triangle only
/// and requires an exactly symmetric matrix (InvalidArgument otherwise).
void write(std::ostream& out, const DenseMatrix& d, Symmetry sym = Symmetry::general);
void write(const std::filesystem::path& path, const DenseMatrix& d, Symmetry sym = Symmetry::general);
void write(std::ostream& out, const EllpackMatrix& a, Symmetry sym = Symmetry::general);
void write(const std::filesystem::path& path, const EllpackMatrix& a,
           Symmetry sym = Symmetry::general);

}  // namespace sp2bench::mm
