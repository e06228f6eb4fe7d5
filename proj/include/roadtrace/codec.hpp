#pragma once

#include "roadtrace/grid_map.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace roadtrace {

// 8-bit grayscale (1 channel) or RGB (3 channels) PNG.
std::vector<std::uint8_t> encode_png(const GridMap &m);
// Decodes to 1 channel for gray sources and 3 channels otherwise; alpha is
// dropped. Throws std::runtime_error on corrupt input.
GridMap decode_png(std::span<const std::uint8_t> bytes);

void write_png(const GridMap &m, const std::filesystem::path &path);
GridMap read_png(const std::filesystem::path &path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_file(const std::filesystem::path &path);

std::vector<std::uint8_t> read_file(const std::filesystem::path &path);

}  // namespace roadtrace
