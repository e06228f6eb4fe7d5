#include "roadtrace/codec.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <fstream>
#include <iterator>
#include <memory>
#include <stdexcept>

namespace roadtrace {

namespace {

struct PngImage {
  png_image image{};
  PngImage() {
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
};

std::uint32_t png_format_for(int channels) {
  switch (channels) {
    case 1: return PNG_FORMAT_GRAY;
    case 3: return PNG_FORMAT_RGB;
    default: throw std::invalid_argument("PNG output supports 1 or 3 channels");
  }
}

}  // namespace

std::vector<std::uint8_t> encode_png(const GridMap &m) {
  PngImage png;
  png.image.width = static_cast<png_uint_32>(m.width());
  png.image.height = static_cast<png_uint_32>(m.height());
  png.image.format = png_format_for(m.channels());
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png.image, nullptr, &size, 0, m.data().data(), 0, nullptr))
    throw std::runtime_error(std::string("PNG encode failed: ") + png.image.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png.image, out.data(), &size, 0, m.data().data(), 0, nullptr))
    throw std::runtime_error(std::string("PNG encode failed: ") + png.image.message);
  out.resize(size);
  return out;
}

GridMap decode_png(std::span<const std::uint8_t> bytes) {
  PngImage png;
  if (!png_image_begin_read_from_memory(&png.image, bytes.data(), bytes.size()))
    throw std::runtime_error(std::string("PNG decode failed: ") + png.image.message);
  const bool gray = (png.image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  png.image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  const int channels = gray ? 1 : 3;
  GridMap m(static_cast<int>(png.image.width), static_cast<int>(png.image.height), channels);
  if (!png_image_finish_read(&png.image, nullptr, m.data().data(), 0, nullptr))
    throw std::runtime_error(std::string("PNG decode failed: ") + png.image.message);
  return m;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_png(const GridMap &m, const std::filesystem::path &path) {
  const auto bytes = encode_png(m);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

GridMap read_png(const std::filesystem::path &path) {
  const auto bytes = read_file(path);
  try {
    return decode_png(bytes);
  } catch (const std::runtime_error &err) {
    throw std::runtime_error(path.string() + ": " + err.what());
  }
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char *>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw std::runtime_error("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char *>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw std::runtime_error("invalid base64 payload");
  // EVP_DecodeBlock keeps the bytes produced by '=' padding.
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 15]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path &path) { return sha256_hex(read_file(path)); }

}  // namespace roadtrace
