#pragma once

#include <array>
#include <cstdint>

namespace phyloabc {

// Reproducible random stream keyed by (seed, stream id).  The same pair always
// produces the same sequence, and distinct stream ids give statistically
// independent streams, so per-replicate streams can be consumed in parallel
// without coordination.  xoshiro256++ state seeded through splitmix64; all
// samplers are implemented here (not std::) so sequences do not depend on the
// standard library implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform();
  double uniform(double lo, double hi);

  double normal();  // standard normal, Marsaglia polar
  double normal(double mean, double sd);

  // Unit-scale gamma, shape > 0.  Marsaglia-Tsang, with the boosting trick
  // gamma(a) = gamma(a+1) * U^(1/a) for a < 1.
  double gamma(double shape);

  // df >= 0; df == 0 is the point mass at zero.
  double chisq(double df);

  std::uint64_t poisson(double mean);

  std::uint64_t seed_value() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::array<std::uint64_t, 4> s_;
  std::uint64_t seed_;
  std::uint64_t stream_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;

  std::uint64_t poisson_inversion(double mean);
  std::uint64_t poisson_ptrs(double mean);
};

// Independent sub-seed for a tagged purpose, so different uses of one master
// seed (trees, observed datasets, replicate batches, ...) never share streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace phyloabc
