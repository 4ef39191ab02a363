#pragma once

#include <cstdint>
#include <random>

namespace mqe {

// splitmix64 finalizer; cheap, well-mixed, used for deriving stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Tags keep independently derived streams from colliding.
enum class StreamTag : std::uint64_t {
  placement = 1,
  robot = 2,
  plan = 3,
  measure = 4,
  comm = 5,
  field_synth = 6,
  trial = 7,
};

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return mix64(base ^ mix64(tag + 0x632be59bd9b4e019ull));
}
inline std::uint64_t derive_seed(std::uint64_t base, StreamTag tag) {
  return derive_seed(base, static_cast<std::uint64_t>(tag));
}
inline std::uint64_t derive_seed(std::uint64_t base, StreamTag tag, std::uint64_t a) {
  return derive_seed(derive_seed(base, tag), a);
}
inline std::uint64_t derive_seed(std::uint64_t base, StreamTag tag, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(derive_seed(base, tag), a), b);
}

// A self-contained random stream. Owned by exactly one caller; never shared
// across threads.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(mix64(seed ^ 0x7f4a7c15ull)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(eng_);
  }
  // Inclusive range.
  int uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(eng_);
  }
  std::uint64_t next_u64() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mqe
