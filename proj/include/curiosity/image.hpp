#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "curiosity/common.hpp"

namespace curiosity {

// Square RGB image, row-major, interleaved channels.
struct ViewImage {
  int size = 0;
  std::vector<std::uint8_t> pixels;

  ViewImage() = default;
  explicit ViewImage(int n) : size(n), pixels(static_cast<std::size_t>(n) * n * 3, 0) {}

  std::uint8_t& at(int row, int col, int c) {
    return pixels[(static_cast<std::size_t>(row) * size + col) * 3 + c];
  }
  std::uint8_t at(int row, int col, int c) const {
    return pixels[(static_cast<std::size_t>(row) * size + col) * 3 + c];
  }
  bool operator==(const ViewImage&) const = default;
};

inline double luminance(const ViewImage& img, int row, int col) {
  return 0.299 * img.at(row, col, 0) + 0.587 * img.at(row, col, 1) + 0.114 * img.at(row, col, 2);
}

inline void write_ppm(const std::filesystem::path& path, const ViewImage& img) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os << "P6\n" << img.size << ' ' << img.size << "\n255\n";
  os.write(reinterpret_cast<const char*>(img.pixels.data()),
           static_cast<std::streamsize>(img.pixels.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

inline ViewImage read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (magic != "P6" || w != h || w <= 0 || maxval != 255)
    throw IoError("unsupported PPM header in " + path.string());
  is.get();
  ViewImage img(w);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (!is) throw IoError("truncated PPM " + path.string());
  return img;
}

}  // namespace curiosity
