#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace rlvrsim {

// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// What a stream is used for. Distinct purposes never share counter space.
enum class Purpose : std::uint32_t {
  kProblem = 1,
  kMode = 2,
  kBucket = 3,
  kDeviation = 4,
  kFlip = 5,
  kAuxiliary = 6,
};

// Logical coordinates of one random stream inside a run.
struct StreamCoord {
  std::uint32_t step = 0;
  std::uint32_t query = 0;
  std::uint32_t rollout = 0;
  Purpose purpose = Purpose::kAuxiliary;
};

// Deterministic random stream keyed by (seed, coordinates). Draws from one
// stream never depend on how many other streams were used, so rollouts can
// be generated in any order or on any number of threads.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, StreamCoord coord);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform on (0, 1].
  double uniform_open_closed() { return 1.0 - uniform(); }
  // Uniform on [lo, hi], unbiased.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  // Index drawn with the given probabilities (need not be normalized).
  std::size_t categorical(std::span<const double> weights);

 private:
  void refill();

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  int used_ = 4;
};

}  // namespace rlvrsim
