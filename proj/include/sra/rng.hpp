#pragma once

#include <cstdint>
#include <random>

namespace sra {

/// Counter-derived seeding: replicate k of a study seeded with `master` gets
/// its own independent stream, so results do not depend on how replicates are
/// distributed over workers.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

/// Deterministic sampling stream. All transforms are written out explicitly
/// (not std::*_distribution) so sequences are stable across standard library
/// implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}

  double u01() {
    // 53-bit mantissa uniform in (0,1); never returns 0.
    const std::uint64_t r = eng_();
    return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();
  double exponential() ;                       // rate 1
  double inverse_gaussian(double mu, double lambda);

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sra
