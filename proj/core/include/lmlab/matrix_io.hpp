#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "lmlab/numkit.hpp"

namespace lmlab {

// CSV: one matrix row per line, comma-separated, '.' decimal point, shortest
// round-trip representation. Independent of the global locale.
void write_csv(std::ostream& os, const RealMatrix& m);
RealMatrix read_csv(std::istream& is);

// Binary: uint32 rows, uint32 cols (little-endian, 8 bytes total), then
// rows*cols IEEE-754 float64 values, little-endian, row-major.
void write_binary(std::ostream& os, const RealMatrix& m);
RealMatrix read_binary(std::istream& is);

void save_csv(const std::filesystem::path& path, const RealMatrix& m);
RealMatrix load_csv(const std::filesystem::path& path);
void save_binary(const std::filesystem::path& path, const RealMatrix& m);
RealMatrix load_binary(const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);
double parse_double(std::string_view s);

}  // namespace lmlab
