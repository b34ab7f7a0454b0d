#pragma once

// Output formats: estimate CSV, wide curve tables, PBM bitmaps and JSON run
// manifests.

#include "fracperc/grid.hpp"
#include "fracperc/montecarlo.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fracperc::io {

/// 17 significant digits round-trip every double.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", x);
  return buffer;
}

inline constexpr const char* kEstimateHeader =
    "M,p,n,functional,target,mean,stderr,count,rescaled_mean";

inline void write_estimate_header(std::ostream& os) { os << kEstimateHeader << '\n'; }

inline void write_estimate_row(std::ostream& os, const montecarlo::EstimateRow& row) {
  os << row.M << ',' << format_double(row.p) << ',' << row.n << ','
     << montecarlo::to_string(row.functional) << ',' << analytic::to_string(row.target) << ','
     << format_double(row.estimate.mean()) << ',' << format_double(row.estimate.standard_error())
     << ',' << row.estimate.count() << ','
     << (row.rescaled_mean ? format_double(*row.rescaled_mean) : std::string("nan")) << '\n';
}

/// Table with a header row and numeric cells; empty optional cells print as nan.
struct WideTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void write(std::ostream& os) const {
    for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
    os << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
      os << '\n';
    }
  }
};

/// Plain PBM (P1): 1 is black, a present cell. Lines are kept under 70 chars.
inline void write_pbm(std::ostream& os, const BitGrid& grid) {
  os << "P1\n" << grid.width() << ' ' << grid.height() << '\n';
  for (std::int64_t y = 0; y < grid.height(); ++y) {
    int column = 0;
    for (std::int64_t x = 0; x < grid.width(); ++x) {
      if (column >= 34) {
        os << '\n';
        column = 0;
      }
      os << (column ? " " : "") << (grid.get(x, y) ? '1' : '0');
      ++column;
    }
    os << '\n';
  }
}

/// Reads a plain PBM back; used by tests and for round-trip checks.
inline BitGrid read_pbm(std::istream& is) {
  std::string magic;
  is >> magic;
  if (magic != "P1") throw std::runtime_error("read_pbm: not a plain PBM");
  auto next_token = [&is]() {
    std::string token;
    while (is >> token) {
      if (token[0] == '#') {
        std::string rest;
        std::getline(is, rest);
        continue;
      }
      return token;
    }
    throw std::runtime_error("read_pbm: truncated file");
  };
  const std::int64_t width = std::stoll(next_token());
  const std::int64_t height = std::stoll(next_token());
  BitGrid grid(width, height);
  for (std::int64_t y = 0; y < height; ++y) {
    for (std::int64_t x = 0; x < width; ++x) {
      char c = 0;
      do {
        if (!is.get(c)) throw std::runtime_error("read_pbm: truncated raster");
      } while (c != '0' && c != '1');
      grid.set(x, y, c == '1');
    }
  }
  return grid;
}

/// 64-bit FNV-1a of a canonical configuration text, as 16 hex digits.
inline std::string config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline void write_json(const std::string& path, const nlohmann::json& document) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << document.dump(2) << '\n';
}

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  writer(out);
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace fracperc::io
