#pragma once

#include <cstdint>
#include <vector>

#include "wfdiff/estimates.hpp"
#include "wfdiff/model.hpp"
#include "wfdiff/rng.hpp"
#include "wfdiff/testfuncs.hpp"

namespace wfdiff {

// Time is measured in generations; one Euler-Maruyama substep advances dt.
struct DiffusionConfig {
  int population;           // N
  MutationMatrix mutation;
  double dt = 1.0 / 64.0;

  DiffusionConfig(int population, MutationMatrix mutation, double dt = 1.0 / 64.0);

  // Substep count for a horizon that must be a multiple of dt.
  std::int64_t steps_for(double t) const;
};

// Lower-triangular factor with L L^T = A for PSD A. Pivots below 1e-12 are
// zeroed (rank-deficient boundary covariances); a pivot below -1e-10 is a
// domain error.
Mat psd_factor(const Mat& a);

// Euclidean projection onto I, computed on the lifted r-vector (x, 1 - sum x)
// against the standard simplex and truncated back. Identity on I.
Vec project_to_simplex(const Vec& x);

// One explicit step of x' = Pi(x + b dt + sigma(x) xi sqrt(dt / 2N)).
SimplexPoint em_step(const SimplexPoint& x, const DiffusionConfig& cfg, Rng& rng);
// Same with the Gaussian vector supplied (used for scheme diagnostics;
// zero noise gives the forward-Euler drift step).
SimplexPoint em_step_with_noise(const SimplexPoint& x, const DiffusionConfig& cfg,
                                const Vec& noise);

struct DiffusionPath {
  double dt = 0.0;
  std::vector<Vec> states;  // states[k] at time k * dt
};
DiffusionPath sample_diffusion_path(const SimplexPoint& x0,
                                    const DiffusionConfig& cfg, double t_max,
                                    Rng& rng);

// Monte Carlo E_x0[f(X(t))]. Replicate streams are derived from (seed,
// replicate index) and merged in fixed block order: bit-identical results
// for any worker count.
MonteCarloEstimate weak_expectation(const Polynomial& f, const SimplexPoint& x0,
                                    const DiffusionConfig& cfg, double t,
                                    std::int64_t replicates, std::uint64_t seed,
                                    int workers = 1);
// Same paths evaluated at several horizons (nondecreasing multiples of dt).
std::vector<MonteCarloEstimate> weak_expectation_at(
    const Polynomial& f, const SimplexPoint& x0, const DiffusionConfig& cfg,
    const std::vector<double>& times, std::int64_t replicates,
    std::uint64_t seed, int workers = 1);

// Generator of the limiting diffusion applied to f at x:
// (1/4N) <A(x), Hess f(x)> + <b(x), grad f(x)>.
double generator_apply(const Polynomial& f, const SimplexPoint& x,
                       int population, const MutationMatrix& u);

// Two-allele noise coefficient sigma(x) = sqrt(x(1-x)) satisfies
// |sigma(x) - sigma(y)|^2 <= 2|x - y|; returns the largest violation of that
// inequality over sampled pairs (nonpositive when it holds).
double holder_modulus_check_r2(std::int64_t pairs, Rng& rng);

}  // namespace wfdiff
