#include "woundbench/mask.hpp"

#include "woundbench/error.hpp"
#include "woundbench/json_format.hpp"

#include <algorithm>
#include <cctype>

namespace woundbench {

std::size_t BinaryMask2D::count() const {
  return static_cast<std::size_t>(std::count_if(pixels.begin(), pixels.end(), [](std::uint8_t p) { return p != 0; }));
}

namespace {

// Header tokens are separated by whitespace; '#' starts a comment running to
// end of line.
long long read_header_int(const std::string& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) {
      ++pos;
    }
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') {
        ++pos;
      }
      continue;
    }
    break;
  }
  if (pos >= bytes.size()) {
    throw input_error("unexpected EOF");
  }
  if (!std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    throw input_error("unsupported mask format");
  }
  long long v = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    v = v * 10 + (bytes[pos] - '0');
    if (v > 1'000'000'000) {
      throw input_error("unsupported mask format");
    }
    ++pos;
  }
  return v;
}

} // namespace

BinaryMask2D parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw input_error("unsupported mask format");
  }
  std::size_t pos = 2;
  const long long width = read_header_int(bytes, pos);
  const long long height = read_header_int(bytes, pos);
  const long long maxval = read_header_int(bytes, pos);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw input_error("unsupported mask format");
  }
  // exactly one whitespace byte separates the header from the raster
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw input_error("unexpected EOF");
  }
  ++pos;
  const auto n = static_cast<std::size_t>(width * height);
  if (bytes.size() - pos < n) {
    throw input_error("unexpected EOF");
  }
  BinaryMask2D mask(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t i = 0; i < n; ++i) {
    mask.pixels[i] = static_cast<unsigned char>(bytes[pos + i]) > 127 ? 1 : 0;
  }
  return mask;
}

std::string serialize_pgm(const BinaryMask2D& mask) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n255\n";
  out.reserve(out.size() + mask.pixels.size());
  for (std::uint8_t p : mask.pixels) {
    out.push_back(p != 0 ? static_cast<char>(255) : static_cast<char>(0));
  }
  return out;
}

BinaryMask2D load_mask(const std::filesystem::path& path) {
  return parse_pgm(read_file(path));
}

void save_mask(const BinaryMask2D& mask, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_pgm(mask));
}

} // namespace woundbench
