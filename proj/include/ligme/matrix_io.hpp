#pragma once

#include <filesystem>
#include <iosfwd>

#include "ligme/linops.hpp"

namespace ligme {

// Plain-text dense format: a header line "rows cols" followed by `rows` lines
// of `cols` space-separated decimals. Vectors are single-column matrices.

Matrix read_matrix(std::istream& in);
Matrix read_matrix(const std::filesystem::path& path);
/// Reads a matrix and requires it to have exactly one column.
Vector read_vector(const std::filesystem::path& path);

/// Values are written with round-trip precision.
void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace ligme
