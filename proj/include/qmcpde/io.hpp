#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmcpde/points.hpp"

namespace qmcpde {

/// Malformed input file; carries the 1-based offending line (0 if unknown).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Generating-vector files: '#' comment lines, then one unsigned integer
// per line. The point count is not stored.
std::vector<std::uint64_t> read_generating_vector(std::istream& in);
std::vector<std::uint64_t> read_generating_vector(const std::filesystem::path& path);
void write_generating_vector(std::ostream& out, const std::vector<std::uint64_t>& z);

// Generating-matrix files: header "s m p", then s lines of m integers.
GeneratingMatrices read_generating_matrices(std::istream& in);
GeneratingMatrices read_generating_matrices(const std::filesystem::path& path);
void write_generating_matrices(std::ostream& out, const GeneratingMatrices& mats);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

} // namespace qmcpde
