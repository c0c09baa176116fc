#pragma once

#include <cstdint>
#include <random>

namespace wfdiff {

// Quantile of the standard normal distribution, accurate to ~1e-15.
// Domain (0,1); throws std::domain_error outside.
double inverse_normal_cdf(double p);

// Deterministic 64-bit generator with (0,1) uniforms and inverse-CDF normals.
// mt19937_64 is fully specified by the standard, and the normal transform is
// pure arithmetic, so a seed pins the stream independent of the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // 53-bit uniform, strictly inside (0,1).
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double normal() { return inverse_normal_cdf(uniform()); }

 private:
  std::mt19937_64 gen_;
};

// Well-mixed child seed for (master, purpose tag, stream index). Replicate
// streams are addressed by global index so results do not depend on how
// replicates are distributed over workers.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                          std::uint64_t index);

inline Rng stream_rng(std::uint64_t master, std::uint64_t tag,
                      std::uint64_t index) {
  return Rng(derive_seed(master, tag, index));
}

}  // namespace wfdiff
