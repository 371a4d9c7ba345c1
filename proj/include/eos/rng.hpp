#ifndef EOS_RNG_HPP
#define EOS_RNG_HPP

#include <cstdint>
#include <string>

namespace eos {

// SplitMix64 generator.  Chosen over std::mt19937_64 because the whole output
// sequence, including the normal deviates below, must be bit-identical across
// platforms and standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64();

  // Uniform on (0,1): 53-bit mantissa, never returns 0 or 1.
  double next_unit();

  // Standard normal via Box-Muller; caches the spare deviate.
  double next_normal();

  // Uniform integer in [0, n).
  uint64_t next_below(uint64_t n);

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// FNV-1a 64-bit hash of a byte string.
uint64_t fnv1a64(const std::string& bytes);

// Derive a child seed by hashing the parent seed with a label.
uint64_t derive_seed(uint64_t parent, const std::string& label);

// Canonical text form of an inverse temperature: "inf" or shortest
// round-trip decimal.  Used in seed derivation and file output.
std::string format_beta(double beta);

// Seed for one replication: a hash of the master seed and the replication
// coordinates, so any (scenario, n, beta, r) cell can be reproduced alone.
uint64_t replication_seed(uint64_t master, const std::string& scenario_id,
                          int n, double beta, int r);

}  // namespace eos

#endif  // EOS_RNG_HPP
