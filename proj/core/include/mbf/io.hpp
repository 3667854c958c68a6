#pragma once

#include <string>
#include <string_view>

#include "mbf/matrix.hpp"

namespace mbf {

// Shortest decimal representation that parses back to the same double
// (std::to_chars), so emitted files are byte-stable and round-trip.
std::string format_double(double v);
double parse_double(std::string_view s);

// Comma-delimited numeric matrix, no quoting. skip_header drops the
// first line. Throws ParseError naming the offending 1-based line.
Matrix parse_csv_matrix(const std::string& text, bool skip_header, const std::string& source_name);
Matrix load_csv_matrix(const std::string& path, bool skip_header);

std::string read_file(const std::string& path);
// Writes through a temp file in the same directory, then renames, so
// interrupted runs never leave truncated outputs.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace mbf
