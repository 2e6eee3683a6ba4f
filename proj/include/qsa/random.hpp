#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace qsa {

namespace detail {

// SplitMix64 output finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
inline constexpr std::uint64_t kStreamSalt = 0x632BE59BD9B4E019ULL;

}  // namespace detail

/// Counter-based pseudo-random source.
///
/// Word number c (c = 1, 2, ...) of a source with key k is
/// mix64(k + c * 0x9E3779B97F4A7C15), where mix64 is the SplitMix64
/// finalizer. A root source has key mix64(seed). The substream with index i of
/// a source with key k has key mix64(k ^ mix64(i + 0x632BE59BD9B4E019)) and a
/// fresh counter. Identical seed and call sequence give identical output on
/// every platform; only the std:: distributions layered on top (binomial) are
/// standard-library specific.
class RandomSource {
 public:
  using result_type = std::uint64_t;

  explicit RandomSource(std::uint64_t seed = 0) noexcept
      : key_(detail::mix64(seed)) {}

  static RandomSource substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return RandomSource(seed).split(index);
  }

  RandomSource split(std::uint64_t index) const noexcept {
    RandomSource child;
    child.key_ = detail::mix64(key_ ^ detail::mix64(index + detail::kStreamSalt));
    child.counter_ = 0;
    return child;
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  std::int64_t binomial(std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    std::binomial_distribution<std::int64_t> dist(trials, p);
    return dist(*this);
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// Draws an index from a cumulative table (last entry ~1).
inline std::size_t sample_cumulative(const std::vector<double>& cumulative,
                                     RandomSource& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

/// Runs `body(rng, rep)` for rep = 0..reps-1, each on substream (seed, rep).
/// Results are returned in repetition order, independent of the thread count.
template <class Body>
auto run_repetitions(std::uint64_t seed, std::size_t reps, Body body,
                     unsigned threads = 0) {
  using Result = decltype(body(std::declval<RandomSource&>(), std::size_t{}));
  std::vector<Result> results(reps);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(reps, 1)));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      RandomSource rng = RandomSource::substream(seed, r);
      results[r] = body(rng, r);
    }
  };
  if (threads <= 1) {
    work(0, reps);
    return results;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (reps + threads - 1) / threads;
  for (unsigned w = 0; w < threads; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(reps, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(work, begin, end);
  }
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace qsa
