#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "yarnscope/raster.hpp"

namespace yarnscope {

// Binary PGM (P5, maxval 255). Comments are accepted in the header.
GrayImage read_pgm(std::istream& in);
void write_pgm(std::ostream& out, const GrayImage& img);
GrayImage load_pgm(const std::filesystem::path& path);
void save_pgm(const GrayImage& img, const std::filesystem::path& path);

/// Shortest round-trip decimal, independent of the global locale.
std::string format_number(double value);

/// "index,value" per line, LF endings.
void write_index_value_csv(std::ostream& out, std::span<const std::uint64_t> values);
void write_index_value_csv(std::ostream& out, std::span<const double> values);

}  // namespace yarnscope
