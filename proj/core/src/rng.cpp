#include "circmode/rng.hpp"

#include "circmode/angle.hpp"
#include "circmode/error.hpp"

#include <cmath>

namespace circmode {

std::uint64_t mix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> keys)
{
  std::uint64_t h = 0x6A09E667F3BCC909ULL;
  for (std::uint64_t key : keys)
    h = mix64(h ^ mix64(key));
  return h;
}

namespace {

std::uint64_t engine_seed(std::uint64_t master_seed, std::uint64_t stream_id)
{
  return mix64(mix64(master_seed) ^ mix64(stream_id ^ 0xD1B54A32D192ED03ULL));
}

} // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
  : master_seed_(master_seed)
  , stream_id_(stream_id)
  , engine_(engine_seed(master_seed, stream_id))
{}

RngStream RngStream::substream(std::uint64_t id) const
{
  return RngStream(master_seed_, derive_stream_id({ stream_id_, id }));
}

double RngStream::uniform()
{
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n)
{
  if (n == 0)
    throw InvalidParameter("uniform_index needs n >= 1");
  // Lemire's multiply-and-reject.
  const std::uint64_t threshold = (0 - n) % n;
  __extension__ using u128 = unsigned __int128;
  for (;;) {
    const u128 m = static_cast<u128>(engine_()) * n;
    if (static_cast<std::uint64_t>(m) >= threshold)
      return static_cast<std::uint64_t>(m >> 64);
  }
}

double RngStream::normal()
{
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double RngStream::gamma(double shape)
{
  if (!(shape > 0.0) || !std::isfinite(shape))
    throw InvalidParameter("gamma shape must be positive");
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x)
      return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

double RngStream::beta(double a, double b)
{
  const double x = gamma(a);
  const double y = gamma(b);
  return x / (x + y);
}

} // namespace circmode
