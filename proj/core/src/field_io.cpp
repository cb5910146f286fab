#include "fracspde/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fracspde/errors.hpp"

namespace fracspde {

void write_u64_le(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void write_f64_le(std::ostream& os, double v) { write_u64_le(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t read_u64_le(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw InvalidArgument("binary field: truncated input");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double read_f64_le(std::istream& is) { return std::bit_cast<double>(read_u64_le(is)); }

void write_field(std::ostream& os, const Field& field) {
  write_u64_le(os, static_cast<std::uint64_t>(field.grid.dim()));
  write_u64_le(os, field.grid.n());
  write_f64_le(os, field.grid.side_length());
  for (double v : field.values) write_f64_le(os, v);
}

Field read_field(std::istream& is) {
  const std::uint64_t dim = read_u64_le(is);
  const std::uint64_t n = read_u64_le(is);
  const double length = read_f64_le(is);
  if (dim < 1 || dim > 3 || n > (1u << 16)) throw InvalidArgument("binary field: bad header");
  const TorusGrid grid(static_cast<int>(dim), n, length);
  std::vector<double> v(grid.size());
  for (double& x : v) x = read_f64_le(is);
  return Field(grid, std::move(v));
}

void write_fields_binary(const std::string& path, const std::vector<Field>& fields) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  for (const Field& f : fields) write_field(os, f);
  if (!os) throw InvalidArgument("write to " + path + " failed");
}

std::vector<Field> read_fields_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path);
  std::vector<Field> out;
  while (is.peek() != std::char_traits<char>::eof()) out.push_back(read_field(is));
  return out;
}

void write_field_csv(const std::string& path, const Field& field) {
  if (field.grid.dim() != 1) throw InvalidArgument("CSV export is for d = 1 fields");
  std::ofstream os(path);
  if (!os) throw InvalidArgument("cannot open " + path + " for writing");
  os.precision(17);
  os << "x,value\n";
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    os << field.grid.point(i)[0] << ',' << field.values[i] << '\n';
  }
}

Field read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path);
  std::string line;
  std::getline(is, line);
  if (line != "x,value") throw InvalidArgument(path + ": expected header x,value");
  std::vector<double> xs, vs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument(path + ": malformed row");
    xs.push_back(std::stod(line.substr(0, comma)));
    vs.push_back(std::stod(line.substr(comma + 1)));
  }
  if (xs.size() < 2) throw InvalidArgument(path + ": too few rows");
  const double length = static_cast<double>(xs.size()) * (xs[1] - xs[0]);
  return Field(TorusGrid(1, xs.size(), length), std::move(vs));
}

}  // namespace fracspde
