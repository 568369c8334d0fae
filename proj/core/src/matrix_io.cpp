#include "lmlab/matrix_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace lmlab {
namespace {

void put_le(std::ostream& os, std::uint64_t v, int bytes) {
  std::array<char, 8> buf{};
  for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  os.write(buf.data(), bytes);
}

std::uint64_t get_le(std::istream& is, int bytes) {
  std::array<unsigned char, 8> buf{};
  is.read(reinterpret_cast<char*>(buf.data()), bytes);
  if (is.gcount() != bytes) throw FormatError("binary matrix: truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open for reading: " + path.string());
  return is;
}

}  // namespace

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) throw FormatError("format_double failed");
  return std::string(buf.data(), ptr);
}

double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw FormatError("not a number: '" + std::string(s) + "'");
  }
  return x;
}

void write_csv(std::ostream& os, const RealMatrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) os << ',';
      os << format_double(m(r, c));
    }
    os << '\n';
  }
}

RealMatrix read_csv(std::istream& is) {
  std::vector<double> data;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      data.push_back(parse_double(rest.substr(0, comma)));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) cols = count;
    else if (count != cols) throw FormatError("csv: ragged row " + std::to_string(rows));
    ++rows;
  }
  return RealMatrix(rows, cols, std::move(data));
}

void write_binary(std::ostream& os, const RealMatrix& m) {
  constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
  if (m.rows() > kMax || m.cols() > kMax) throw ShapeError("binary matrix: dims exceed uint32");
  put_le(os, m.rows(), 4);
  put_le(os, m.cols(), 4);
  for (double x : m.data()) put_le(os, std::bit_cast<std::uint64_t>(x), 8);
}

RealMatrix read_binary(std::istream& is) {
  const auto rows = static_cast<std::size_t>(get_le(is, 4));
  const auto cols = static_cast<std::size_t>(get_le(is, 4));
  std::vector<double> data(rows * cols);
  for (auto& x : data) x = std::bit_cast<double>(get_le(is, 8));
  return RealMatrix(rows, cols, std::move(data));
}

void save_csv(const std::filesystem::path& path, const RealMatrix& m) {
  auto os = open_out(path);
  write_csv(os, m);
}

RealMatrix load_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_csv(is);
}

void save_binary(const std::filesystem::path& path, const RealMatrix& m) {
  auto os = open_out(path);
  write_binary(os, m);
}

RealMatrix load_binary(const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_binary(is);
}

}  // namespace lmlab
