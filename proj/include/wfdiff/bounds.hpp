#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wfdiff/model.hpp"

namespace wfdiff {

// Decay rate of the order-m derivative semigroup along coordinate tuple ks
// (0-based, each in 0..r-2):
//   sum_i rate_sum(k_i) + m(m-1)/(4N).
double decay_rate(std::span<const int> ks, const MutationMatrix& u, int population);

// Minimum of decay_rate over all m-tuples; separable, so it is
// m * min_k rate_sum(k) + m(m-1)/(4N).
double min_decay_rate(int m, const MutationMatrix& u, int population);

// Per-order coefficients C_1..C_4 of the one-step comparison for r >= 3.
std::array<double, 4> step_constants(const MutationMatrix& u, int population);

// Two-allele specialization: coefficients and the decay rates
// m(m-1)/(4N) + m(u12+u21) for m = 1..4.
struct TwoAlleleConstants {
  std::array<double, 4> coeff;
  std::array<double, 4> rate;
};
TwoAlleleConstants two_allele_constants(double u12, double u21, int population);

// Classical two-allele comparison bound (uniform in the horizon) for
// f with six bounded derivatives; norms are sup|f^(j)|, j = 1..6.
double ethier_norman_theta(double mu1, double mu2);
double ethier_norman_bound(double mu1, double mu2, int population,
                           std::span<const double, 6> f_norms);

// (1 - e^{-n lambda}) / (1 - e^{-lambda}); the lambda -> 0 limit is n.
double geometric_factor(double rate, std::int64_t n);

struct BoundTerm {
  int order = 0;            // m
  double rate = 0.0;        // lambda_min(m)
  double coefficient = 0.0; // C_m
  double factor = 0.0;      // geometric factor at n
  double norm = 0.0;        // sup_x |grad^m f(x)|_2 (upper bound)
  double contribution = 0.0;
};

struct BoundReport {
  std::string regime;  // "multi_allele" | "two_allele" | "ethier_norman"
  int allele_count = 0;
  int population = 0;
  std::int64_t horizon = 0;
  std::vector<BoundTerm> terms;
  double total = 0.0;
};

// Accumulated chain-vs-diffusion bound at horizon n; norms[m-1] bounds
// sup_x |grad^m f(x)|_2. Dispatches on r: two-allele coefficients for r = 2,
// the r >= 3 coefficients otherwise.
BoundReport total_bound(const MutationMatrix& u, int population,
                        std::int64_t n, std::span<const double, 4> norms);

// Report wrapper for the classical bound (r = 2 only).
BoundReport ethier_norman_report(double mu1, double mu2, int population,
                                 std::int64_t n,
                                 std::span<const double, 6> f_norms);

}  // namespace wfdiff
