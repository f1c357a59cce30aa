#pragma once

// Grid volumes on disk: a small text header next to a raw little-endian
// float64 payload, plus 16-bit PGM export of 2D slices.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "banach_fbs/tv.hpp"

namespace bfbs {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::uint64_t to_little_endian(std::uint64_t x) {
  if constexpr (std::endian::native == std::endian::little) return x;
  std::uint64_t y = 0;
  for (int i = 0; i < 8; ++i) y |= ((x >> (8 * i)) & 0xffu) << (8 * (7 - i));
  return y;
}

}  // namespace detail

/// Writes `<stem>.hdr` and `<stem>.raw`; returns the header path.
///
/// Header lines: `dims: n1 n2 [n3]`, `spacing: h`, `dtype: f64le`,
/// `data: <raw file name>`.
inline std::filesystem::path write_grid(const std::filesystem::path& stem, const GridField& g) {
  g.validate();
  std::filesystem::path hdr = stem;
  hdr += ".hdr";
  std::filesystem::path raw = stem;
  raw += ".raw";
  {
    std::ofstream h(hdr);
    if (!h) throw IoError("cannot write " + hdr.string());
    h << "dims:";
    for (auto n : g.dims) h << ' ' << n;
    h << '\n';
    h.precision(17);
    h << "spacing: " << g.spacing << '\n';
    h << "dtype: f64le\n";
    h << "data: " << raw.filename().string() << '\n';
  }
  std::ofstream out(raw, std::ios::binary);
  if (!out) throw IoError("cannot write " + raw.string());
  for (double v : g.values) {
    const std::uint64_t bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  if (!out) throw IoError("short write to " + raw.string());
  return hdr;
}

inline GridField read_grid(const std::filesystem::path& header, double exponent = 2.0) {
  std::ifstream h(header);
  if (!h) throw IoError("cannot open " + header.string());
  GridField g;
  g.exponent = exponent;
  std::string raw_name, dtype, line;
  bool have_spacing = false;
  while (std::getline(h, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    std::istringstream vs(line.substr(colon + 1));
    if (key == "dims") {
      std::size_t n;
      while (vs >> n) g.dims.push_back(n);
    } else if (key == "spacing") {
      have_spacing = static_cast<bool>(vs >> g.spacing);
    } else if (key == "dtype") {
      vs >> dtype;
    } else if (key == "data") {
      vs >> raw_name;
    }
  }
  if (g.dims.empty() || !have_spacing) throw IoError(header.string() + ": missing dims or spacing");
  if (dtype != "f64le") throw IoError(header.string() + ": unsupported dtype '" + dtype + "'");
  std::filesystem::path raw = header;
  if (raw_name.empty()) {
    raw.replace_extension(".raw");
  } else {
    raw = header.parent_path() / raw_name;
  }
  std::ifstream in(raw, std::ios::binary);
  if (!in) throw IoError("cannot open " + raw.string());
  g.values.resize(GridField::count(g.dims));
  for (double& v : g.values) {
    char buf[8];
    if (!in.read(buf, 8)) throw IoError(raw.string() + ": payload shorter than dims");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    v = std::bit_cast<double>(detail::to_little_endian(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw IoError(raw.string() + ": payload longer than dims");
  }
  g.validate();
  return g;
}

/// Binary PGM (P5, maxval 65535) of a 2D grid, or of slice `index` along the
/// first axis of a 3D grid. The linear map from gray levels back to values is
/// written to `<path>.scale` as `min:` and `max:` lines.
inline void write_pgm_slice(const std::filesystem::path& path, const GridField& g,
                            std::size_t index = 0) {
  if (g.rank() < 2) throw IoError("write_pgm_slice: need a 2D or 3D grid");
  const std::size_t rows = g.dims[g.rank() - 2];
  const std::size_t cols = g.dims[g.rank() - 1];
  const std::size_t plane = rows * cols;
  if (g.rank() == 3 && index >= g.dims[0]) throw IoError("write_pgm_slice: slice out of range");
  const std::size_t offset = g.rank() == 3 ? index * plane : 0;
  const auto first = g.values.begin() + static_cast<std::ptrdiff_t>(offset);
  const auto [lo_it, hi_it] = std::minmax_element(first, first + static_cast<std::ptrdiff_t>(plane));
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double range = hi > lo ? hi - lo : 1.0;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << cols << ' ' << rows << "\n65535\n";
  for (std::size_t i = 0; i < plane; ++i) {
    const double t = (g.values[offset + i] - lo) / range;
    const auto level = static_cast<std::uint16_t>(std::lround(std::clamp(t, 0.0, 1.0) * 65535.0));
    const char be[2] = {static_cast<char>(level >> 8), static_cast<char>(level & 0xffu)};
    out.write(be, 2);
  }
  std::filesystem::path side = path;
  side += ".scale";
  std::ofstream s(side);
  s.precision(17);
  s << "min: " << lo << "\nmax: " << hi << '\n';
}

}  // namespace bfbs
