#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace ssr {

//---------------------------------------------------------------------------//
/*!
 * xoshiro256++ engine satisfying UniformRandomBitGenerator.
 *
 * Streams are derived from (seed, stream id) by SplitMix64 mixing, so every
 * Monte Carlo replication owns an independent, addressable substream and
 * results do not depend on the number of worker threads.
 */
class Rng
{
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()()
  {
    std::uint64_t const result = rotl(s_[0] + s_[3], 23) + s_[0];
    std::uint64_t const t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  //! Uniform double on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  //! Uniform integer on [1, n] (Lemire's nearly divisionless method).
  std::uint64_t uniform_index(std::uint64_t n);

private:
  std::uint64_t s_[4];

  static std::uint64_t rotl(std::uint64_t x, int k)
  {
    return (x << k) | (x >> (64 - k));
  }
};

//! SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

//! Stream id for a (group, member) pair, e.g. (calibration cell, iteration).
std::uint64_t stream_id(std::uint64_t group, std::uint64_t member);

//! Worker count from SSR_WORKERS, else hardware concurrency (at least 1).
unsigned default_worker_count();

//---------------------------------------------------------------------------//
/*!
 * Run \p count replications, replication r driven by Rng(seed, stream_base + r).
 *
 * Work is split across \p workers threads (0 selects default_worker_count()).
 * Each result lands at its replication index, so downstream reductions are
 * order-stable and bit-reproducible for any worker count.
 */
template<class Result>
std::vector<Result> run_replications(std::size_t count,
                                     std::uint64_t seed,
                                     std::uint64_t stream_base,
                                     std::function<Result(Rng&, std::size_t)> const& body,
                                     unsigned workers = 0);

void parallel_for(std::size_t count,
                  std::function<void(std::size_t begin, std::size_t end)> const& body,
                  unsigned workers = 0);

template<class Result>
std::vector<Result> run_replications(std::size_t count,
                                     std::uint64_t seed,
                                     std::uint64_t stream_base,
                                     std::function<Result(Rng&, std::size_t)> const& body,
                                     unsigned workers)
{
  std::vector<Result> results(count);
  parallel_for(
      count,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r)
        {
          Rng rng(seed, stream_base + r);
          results[r] = body(rng, r);
        }
      },
      workers);
  return results;
}

}  // namespace ssr
