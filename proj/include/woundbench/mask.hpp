#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace woundbench {

/// Row-major wound/background raster, top-left origin. Each entry is 0 or 1.
struct BinaryMask2D {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  BinaryMask2D() = default;
  BinaryMask2D(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  bool at(int col, int row) const { return pixels[index(col, row)] != 0; }
  void set(int col, int row, bool wound) { pixels[index(col, row)] = wound ? 1 : 0; }
  std::size_t count() const;

  bool operator==(const BinaryMask2D&) const = default;

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col);
  }
};

/// Binary PGM (P5, maxval <= 255). A stored value > 127 means wound.
BinaryMask2D load_mask(const std::filesystem::path& path);
/// Writes P5 with maxval 255 and pixel values 0 or 255.
void save_mask(const BinaryMask2D& mask, const std::filesystem::path& path);

BinaryMask2D parse_pgm(const std::string& bytes);
std::string serialize_pgm(const BinaryMask2D& mask);

} // namespace woundbench
