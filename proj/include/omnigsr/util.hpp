#ifndef OMNIGSR_UTIL_HPP
#define OMNIGSR_UTIL_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>

namespace omnigsr {

// Counter-based seed derivation (SplitMix64 finalizer over seed and stream
// index). Streams are independent of the order in which they are drawn.
std::uint64_t MixSeed(std::uint64_t seed, std::uint64_t stream);

// Small deterministic generator. Unlike the std distributions, the values
// it produces do not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t NextU64();
  // Uniform in [0, 1).
  double Uniform();
  // Standard normal (Box-Muller, no cached second value).
  double Normal();
  // Uniform integer in [0, bound).
  std::uint64_t Below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

// Runs fn(i) for i in [0, count) on up to `threads` workers using static
// contiguous chunks. threads <= 1 runs inline. Exceptions from workers are
// rethrown (the lowest chunk wins).
void ParallelFor(std::size_t count, int threads,
                 const std::function<void(std::size_t)>& fn);

// Worker count used when callers pass 0.
int DefaultThreads();

std::string Sha256Hex(std::span<const std::uint8_t> bytes);
std::string Sha256Hex(std::string_view text);

// %.9g formatting, the float format used in every JSON file we write.
std::string FormatG9(double v);
// Rounds to the nearest double representable with 9 significant digits.
double RoundG9(double v);

}  // namespace omnigsr

#endif  // OMNIGSR_UTIL_HPP
