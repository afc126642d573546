#include "sra/rng.hpp"

#include <cmath>

namespace sra {

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 over master ^ golden-ratio-spaced counter.
  std::uint64_t z = master ^ (index * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RngStream::normal() {
  // Box-Muller; caches the second variate.
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = u01();
  const double u2 = u01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double RngStream::exponential() { return -std::log(u01()); }

double RngStream::inverse_gaussian(double mu, double lambda) {
  // Michael, Schucany & Haas (1976) transform.
  const double z = normal();
  const double y = z * z;
  const double x = mu + mu * mu * y / (2.0 * lambda) -
                   (mu / (2.0 * lambda)) *
                       std::sqrt(4.0 * mu * lambda * y + mu * mu * y * y);
  const double u = u01();
  if (u <= mu / (mu + x)) return x;
  return mu * mu / x;
}

}  // namespace sra
