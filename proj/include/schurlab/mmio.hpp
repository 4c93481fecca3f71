#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "schurlab/densecore.hpp"

namespace schurlab::mmio {

/// Writes a dense matrix in Matrix Market array format
/// ("%%MatrixMarket matrix array real general", column-major entries).
void write_matrix(std::ostream& os, const DenseMatrix& m);
void write_matrix(const std::filesystem::path& path, const DenseMatrix& m);
void write_vector(const std::filesystem::path& path, const Vector& v);

/// Reads array or coordinate format, real/integer, general or symmetric.
/// Throws ParseError on malformed input.
DenseMatrix read_matrix(std::istream& is);
DenseMatrix read_matrix(const std::filesystem::path& path);
Vector read_vector(const std::filesystem::path& path);

} // namespace schurlab::mmio
