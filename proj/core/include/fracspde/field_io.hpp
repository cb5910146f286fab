#pragma once

// Flat binary field format, one record per field:
//   u64 dim, u64 n_per_axis, f64 side_length, then n^dim f64 values in
//   row-major order; every word little-endian.
// Files holding several fields (time snapshots) are plain concatenations.
// CSV (d = 1 only): header "x,value", one row per grid point.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fracspde/torus.hpp"

namespace fracspde {

void write_u64_le(std::ostream& os, std::uint64_t v);
void write_f64_le(std::ostream& os, double v);
std::uint64_t read_u64_le(std::istream& is);
double read_f64_le(std::istream& is);

void write_field(std::ostream& os, const Field& field);
/// Throws InvalidArgument on a truncated or malformed record.
Field read_field(std::istream& is);

void write_fields_binary(const std::string& path, const std::vector<Field>& fields);
std::vector<Field> read_fields_binary(const std::string& path);

void write_field_csv(const std::string& path, const Field& field);
/// The side length is recovered as n * (x_1 - x_0).
Field read_field_csv(const std::string& path);

}  // namespace fracspde
