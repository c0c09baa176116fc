#include "wfdiff/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace wfdiff {

namespace {

constexpr double kRateFloor = 1e-12;  // below this the factor takes its n limit

void check_population(int population) {
  if (population < 1) throw std::invalid_argument("population must be >= 1");
}

}  // namespace

double decay_rate(std::span<const int> ks, const MutationMatrix& u,
                  int population) {
  check_population(population);
  const int m = static_cast<int>(ks.size());
  if (m < 1) throw std::invalid_argument("decay_rate: empty tuple");
  double rate = m * (m - 1) / (4.0 * population);
  for (int k : ks) {
    if (k < 0 || k > u.allele_count() - 2)
      throw std::invalid_argument("decay_rate: coordinate out of range");
    rate += u.rate_sum(k);
  }
  return rate;
}

double min_decay_rate(int m, const MutationMatrix& u, int population) {
  check_population(population);
  if (m < 1) throw std::invalid_argument("min_decay_rate: m >= 1");
  double least = u.rate_sum(0);
  for (int k = 1; k < u.allele_count() - 1; ++k)
    least = std::min(least, u.rate_sum(k));
  return m * least + m * (m - 1) / (4.0 * population);
}

std::array<double, 4> step_constants(const MutationMatrix& u, int population) {
  check_population(population);
  const int r = u.allele_count();
  if (r < 3)
    throw std::domain_error("step_constants: defined for r >= 3");
  const double n = population;
  const double bs = drift_norm_sup(u).value;
  const double us = rate_sum_max(u);
  const double root_rm2 = std::sqrt(static_cast<double>(r - 2));
  const double root_rm1 = std::sqrt(static_cast<double>(r - 1));

  std::array<double, 4> c{};
  c[0] = 0.5 * bs * us;
  c[1] = root_rm2 / (8.0 * n * root_rm1) * (2.0 * us + 1.0 / (2.0 * n)) +
         0.5 * bs * (bs + std::sqrt(5.0) / (4.0 * n)) +
         (r - 1) * us / std::sqrt(2.0) * (1.0 / n + us);
  c[2] = root_rm2 / (8.0 * n * root_rm1) *
             (bs + bs / root_rm1 + 3.0 * std::sqrt(2.0) / (4.0 * n)) +
         (1.0 / 6.0) * std::pow(static_cast<double>(r - 1), 1.5) *
             (1.0 / (32.0 * n * n) + 3.0 * us / (8.0 * n) + us * us * us);
  c[3] = (r - 2) / (32.0 * n * n * std::pow(static_cast<double>(r - 1), 1.5));
  return c;
}

TwoAlleleConstants two_allele_constants(double u12, double u21,
                                        int population) {
  check_population(population);
  if (!(u12 >= 0.0 && u12 <= 1.0 && u21 >= 0.0 && u21 <= 1.0))
    throw std::invalid_argument("two_allele_constants: rates in [0,1]");
  const double n = population;
  const double umax = std::max(u12, u21);
  const double usum = u12 + u21;

  TwoAlleleConstants out{};
  out.coeff[0] = umax * usum;
  out.coeff[1] = 1.0 / (64.0 * n * n) + usum / (16.0 * n) + umax * umax +
                 5.0 * umax / (8.0 * n);
  out.coeff[2] = 1.0 / (48.0 * n * n) + umax / (8.0 * n) +
                 umax * umax * umax / 6.0;
  out.coeff[3] = 1.0 / (512.0 * n * n);
  for (int m = 1; m <= 4; ++m)
    out.rate[m - 1] = m * (m - 1) / (4.0 * n) + m * usum;
  return out;
}

double ethier_norman_theta(double mu1, double mu2) {
  return (1.0 + 4.0 * std::max(mu1, mu2)) / (1.0 + 2.0 * (mu1 + mu2));
}

double ethier_norman_bound(double mu1, double mu2, int population,
                           std::span<const double, 6> f_norms) {
  check_population(population);
  if (!(mu1 >= 0.0 && mu1 <= 1.0 && mu2 >= 0.0 && mu2 <= 1.0))
    throw std::invalid_argument("ethier_norman_bound: rates in [0,1]");
  const double n = population;
  const double mu_max = std::max(mu1, mu2);
  const double theta = ethier_norman_theta(mu1, mu2);

  double sum_1_6 = 0.0, sum_2_6 = 0.0;
  for (int j = 0; j < 6; ++j) {
    if (f_norms[j] < 0.0)
      throw std::invalid_argument("ethier_norman_bound: norms must be >= 0");
    sum_1_6 += f_norms[j];
    if (j >= 1) sum_2_6 += f_norms[j];
  }

  const double first =
      0.5 * (0.5 * mu_max * f_norms[0] + theta / (16.0 * n) * f_norms[1] +
             1.0 / (216.0 * std::sqrt(3.0) * n) * f_norms[2]);
  const double second =
      0.25 * (4.5 * mu_max * mu_max * sum_1_6 +
              7.0 / (16.0 * n * n) * sum_2_6);
  return first + second;
}

double geometric_factor(double rate, std::int64_t n) {
  if (n < 0) throw std::invalid_argument("geometric_factor: n >= 0");
  if (rate < 0.0) throw std::invalid_argument("geometric_factor: rate >= 0");
  if (rate <= kRateFloor) return static_cast<double>(n);
  return -std::expm1(-rate * static_cast<double>(n)) / -std::expm1(-rate);
}

namespace {

BoundReport assemble(std::string regime, int r, int population, std::int64_t n,
                     const std::array<double, 4>& coeff,
                     const std::array<double, 4>& rate,
                     std::span<const double, 4> norms) {
  BoundReport rep;
  rep.regime = std::move(regime);
  rep.allele_count = r;
  rep.population = population;
  rep.horizon = n;
  for (int m = 1; m <= 4; ++m) {
    if (norms[m - 1] < 0.0)
      throw std::invalid_argument("total_bound: norms must be >= 0");
    BoundTerm t;
    t.order = m;
    t.rate = rate[m - 1];
    t.coefficient = coeff[m - 1];
    t.factor = geometric_factor(t.rate, n);
    t.norm = norms[m - 1];
    t.contribution = t.coefficient * t.factor * t.norm;
    rep.terms.push_back(t);
    rep.total += t.contribution;
  }
  return rep;
}

}  // namespace

BoundReport total_bound(const MutationMatrix& u, int population,
                        std::int64_t n, std::span<const double, 4> norms) {
  check_population(population);
  if (n < 0) throw std::invalid_argument("total_bound: n >= 0");
  const int r = u.allele_count();
  if (r == 2) {
    const TwoAlleleConstants c =
        two_allele_constants(u.rate(0, 1), u.rate(1, 0), population);
    return assemble("two_allele", r, population, n, c.coeff, c.rate, norms);
  }
  const std::array<double, 4> coeff = step_constants(u, population);
  std::array<double, 4> rate{};
  for (int m = 1; m <= 4; ++m) rate[m - 1] = min_decay_rate(m, u, population);
  return assemble("multi_allele", r, population, n, coeff, rate, norms);
}

BoundReport ethier_norman_report(double mu1, double mu2, int population,
                                 std::int64_t n,
                                 std::span<const double, 6> f_norms) {
  BoundReport rep;
  rep.regime = "ethier_norman";
  rep.allele_count = 2;
  rep.population = population;
  rep.horizon = n;
  rep.total = ethier_norman_bound(mu1, mu2, population, f_norms);
  return rep;
}

}  // namespace wfdiff
