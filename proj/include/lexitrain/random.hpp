#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace lexitrain {

// splitmix64 finalizer; also used to derive independent sub-stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Portable seeded stream. std:: distributions are implementation-defined, so
// bounded draws and shuffles are done here to keep sequences identical across
// standard libraries.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, bound). bound must be > 0.
  std::size_t below(std::size_t bound) noexcept {
    const std::uint64_t n = bound;
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return static_cast<std::size_t>(r % n);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  // First `count` elements become a uniform sample without replacement.
  template <typename T>
  void partial_shuffle(std::vector<T>& values, std::size_t count) noexcept {
    for (std::size_t i = 0; i < count && i < values.size(); ++i) {
      std::size_t j = i + below(values.size() - i);
      std::swap(values[i], values[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace lexitrain
