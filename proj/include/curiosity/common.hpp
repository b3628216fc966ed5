#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace curiosity {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

// Invalid configuration values; the CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File system or format failures; the CLI maps this to exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = std::numbers::pi;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  bool operator==(const Vec3&) const = default;

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const {
    const double n = norm();
    return n > 0.0 ? *this * (1.0 / n) : *this;
  }
};

// splitmix64 finalizer, used to derive independent seed streams from one seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace binio {

template <typename T>
void write(std::ostream& os, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read(std::istream& is) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw IoError("unexpected end of binary stream");
  return value;
}

inline void write_doubles(std::ostream& os, const double* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data),
           static_cast<std::streamsize>(n * sizeof(double)));
}

inline void read_doubles(std::istream& is, double* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw IoError("unexpected end of binary stream");
}

inline void write_string(std::ostream& os, const std::string& s) {
  write<std::uint64_t>(os, s.size());
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
  const auto n = read<std::uint64_t>(is);
  if (n > (1ULL << 30)) throw IoError("implausible string length in binary stream");
  std::string s(n, '\0');
  is.read(s.data(), static_cast<std::streamsize>(n));
  if (!is) throw IoError("unexpected end of binary stream");
  return s;
}

}  // namespace binio

}  // namespace curiosity
