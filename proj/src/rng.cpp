#include "eos/rng.hpp"

#include <charconv>
#include <cmath>
#include <limits>

namespace eos {

uint64_t Rng::next_u64() {
  uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::next_unit() {
  // 53 random bits into (0,1); +0.5 keeps the result strictly inside.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

uint64_t Rng::next_below(uint64_t n) {
  // Rejection sampling to avoid modulo bias.
  const uint64_t limit = n * (UINT64_MAX / n);
  uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t derive_seed(uint64_t parent, const std::string& label) {
  char buf[17];
  for (int i = 0; i < 16; ++i) {
    buf[i] = "0123456789abcdef"[(parent >> (60 - 4 * i)) & 0xf];
  }
  buf[16] = '\0';
  return fnv1a64(std::string(buf) + ":" + label);
}

std::string format_beta(double beta) {
  if (std::isinf(beta)) return "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), beta);
  return std::string(buf, res.ptr);
}

uint64_t replication_seed(uint64_t master, const std::string& scenario_id,
                          int n, double beta, int r) {
  std::string label = scenario_id + "/n=" + std::to_string(n) +
                      "/beta=" + format_beta(beta) + "/r=" + std::to_string(r);
  return derive_seed(master, label);
}

}  // namespace eos
