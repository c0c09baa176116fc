#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "wfdiff/estimates.hpp"
#include "wfdiff/model.hpp"
#include "wfdiff/rng.hpp"
#include "wfdiff/testfuncs.hpp"

namespace wfdiff {

// Raised when an exact pushforward would need more lattice states than the
// configured cap; callers fall back to Monte Carlo.
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultStateCap = 200000;

// The lattice simplex I_{2N} enumerated in colexicographic order of
// (alpha_1, ..., alpha_{r-1}); the order fixes row/column conventions for
// distributions and exported tables.
class StateSpace {
 public:
  StateSpace(int r, int two_n);

  int allele_count() const { return r_; }
  int two_n() const { return two_n_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<int>& counts(std::size_t idx) const { return states_[idx]; }
  LatticeState state(std::size_t idx) const {
    return LatticeState(states_[idx], two_n_ / 2);
  }
  std::size_t index_of(const std::vector<int>& alpha) const;

  static std::size_t count_states(int r, int two_n);

 private:
  int r_;
  int two_n_;
  std::vector<std::vector<int>> states_;
  std::map<std::vector<int>, std::size_t> index_;
};

// Probability mass over a shared StateSpace.
class ChainDistribution {
 public:
  ChainDistribution(std::shared_ptr<const StateSpace> space, Vec probs);
  static ChainDistribution point_mass(std::shared_ptr<const StateSpace> space,
                                      const LatticeState& x);

  const StateSpace& space() const { return *space_; }
  std::shared_ptr<const StateSpace> space_ptr() const { return space_; }
  const Vec& probabilities() const { return probs_; }
  double mass(const LatticeState& x) const;
  double total_mass() const { return probs_.sum(); }

 private:
  std::shared_ptr<const StateSpace> space_;
  Vec probs_;
};

// One-step multinomial kernel: 2N offspring drawn on the post-mutation
// frequencies of `from`. Computed in log space.
double transition_probability(const LatticeState& from, const LatticeState& to,
                              const MutationMatrix& u);

// Exact n-step pushforward. Throws capacity_error if the state space
// exceeds `state_cap`.
ChainDistribution evolve_distribution(const ChainDistribution& init,
                                      const MutationMatrix& u, int n);
ChainDistribution lattice_point_mass(const LatticeState& x,
                                     std::size_t state_cap = kDefaultStateCap);

// Multinomial sampling via conditional binomials, one generation.
LatticeState sample_step(const LatticeState& y, const MutationMatrix& u,
                         Rng& rng);
// States at generations 0..n.
std::vector<LatticeState> sample_path(const LatticeState& x0,
                                      const MutationMatrix& u, int n, Rng& rng);

// E_x0[f(Y(n))] by exact pushforward (f evaluated at alpha / 2N).
double chain_expectation(const Polynomial& f, const LatticeState& x0,
                         const MutationMatrix& u, int n,
                         std::size_t state_cap = kDefaultStateCap);
// Same at several horizons in one sweep; horizons must be nondecreasing.
std::vector<double> chain_expectation_at(const Polynomial& f,
                                         const LatticeState& x0,
                                         const MutationMatrix& u,
                                         const std::vector<int>& horizons,
                                         std::size_t state_cap = kDefaultStateCap);

// Monte Carlo fallback for E_x0[f(Y(n))].
MonteCarloEstimate chain_expectation_mc(const Polynomial& f,
                                        const LatticeState& x0,
                                        const MutationMatrix& u, int n,
                                        std::int64_t replicates,
                                        std::uint64_t seed, int workers = 1);

}  // namespace wfdiff
