#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace circmode {

//! SplitMix64 finalizer; a bijective 64-bit mixer.
std::uint64_t mix64(std::uint64_t x);

//! Order-sensitive combination of several 64-bit keys into one stream id.
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> keys);

//! Independent random stream addressed by (master_seed, stream_id).
//!
//! The engine is a Mersenne twister seeded from a mixed hash of both keys,
//! so streams are reproducible in isolation and never share state. All
//! variate transforms are implemented here rather than through the
//! <random> distributions, whose output is implementation-defined.
class RngStream
{
public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  //! A new stream keyed by this stream's ids and `id`.
  RngStream substream(std::uint64_t id) const;

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max()
  {
    return std::numeric_limits<result_type>::max();
  }

  //! Uniform on the open interval (0, 1).
  double uniform();
  //! Uniform index in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  //! Standard normal via Box-Muller.
  double normal();
  //! Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);
  //! Beta(a, b) as a ratio of gammas.
  double beta(double a, double b);

private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

} // namespace circmode
