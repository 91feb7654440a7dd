#ifndef RISKNET_MATRIX_IO_HPP_
#define RISKNET_MATRIX_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "risknet/stochmat.hpp"

namespace risknet::io {

// Shortest-safe round-trip text for a double: 17 significant digits,
// '.' decimal separator regardless of the global locale.
std::string format_double(double x);
double parse_double(std::string_view text);

// Matrices are headerless CSV: one matrix row per line, row-major.
void write_matrix(std::ostream& out, const SquareMatrix& m);
SquareMatrix read_matrix(std::istream& in);

void write_matrix_file(const std::filesystem::path& path, const SquareMatrix& m);
SquareMatrix read_matrix_file(const std::filesystem::path& path);

// Splits a CSV line on commas and trims surrounding whitespace.
std::vector<std::string> split_csv_line(std::string_view line);

// Reads a numeric column file. Lines that fail to parse as numbers in the
// first row are treated as a header and skipped. Returns rows of numbers.
std::vector<std::vector<double>> read_numeric_rows(const std::filesystem::path& path);

}  // namespace risknet::io

#endif  // RISKNET_MATRIX_IO_HPP_
