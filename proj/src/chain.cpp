#include "wfdiff/chain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "wfdiff/parallel.hpp"

namespace wfdiff {

namespace {

constexpr std::uint64_t kChainStreamTag = 0x636861696eull;  // replicate streams

struct LogFactorials {
  explicit LogFactorials(int n) : table(n + 1, 0.0) {
    // Compensated summation keeps the tail of the table tight.
    double comp = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double term = std::log(static_cast<double>(k)) - comp;
      const double next = table[k - 1] + term;
      comp = (next - table[k - 1]) - term;
      table[k] = next;
    }
  }
  double operator()(int k) const { return table[k]; }
  std::vector<double> table;
};

// log of the multinomial mass of counts `alpha` (r-1 entries plus residual)
// at cell probabilities p (length r). -inf encodes zero mass.
double log_multinomial(const std::vector<int>& alpha, int residual,
                       const Vec& logp, const Vec& p, int two_n,
                       const LogFactorials& lf) {
  double lp = lf(two_n);
  const int r = static_cast<int>(p.size());
  for (int i = 0; i < r; ++i) {
    const int a = i + 1 < r ? alpha[i] : residual;
    if (a == 0) continue;
    if (p[i] <= 0.0) return -std::numeric_limits<double>::infinity();
    lp += a * logp[i] - lf(a);
  }
  return lp;
}

void transition_row(const StateSpace& space, const Vec& p_post, Vec& row) {
  const int two_n = space.two_n();
  const LogFactorials lf(two_n);
  Vec logp(p_post.size());
  for (int i = 0; i < p_post.size(); ++i)
    logp[i] = p_post[i] > 0.0 ? std::log(p_post[i]) : 0.0;
  row.resize(space.size());
  for (std::size_t t = 0; t < space.size(); ++t) {
    const auto& alpha = space.counts(t);
    int sum = 0;
    for (int a : alpha) sum += a;
    const double lp =
        log_multinomial(alpha, two_n - sum, logp, p_post, two_n, lf);
    row[t] = std::isinf(lp) ? 0.0 : std::exp(lp);
  }
}

// Inverse-CDF binomial draw; exact, O(n) worst case.
int binomial_draw(int n, double p, Rng& rng) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  const double log_q_total = n * std::log1p(-p);
  const double u = rng.uniform();
  if (log_q_total > -700.0) {
    double pmf = std::exp(log_q_total);
    double cum = pmf;
    int k = 0;
    while (u > cum && k < n) {
      ++k;
      pmf *= (static_cast<double>(n - k + 1) / k) * (p / (1.0 - p));
      cum += pmf;
    }
    return k;
  }
  // exp would underflow at k = 0; n is large and p substantial, so a
  // Bernoulli sum stays exact at acceptable cost.
  int k = 0;
  for (int i = 0; i < n; ++i)
    if (rng.uniform() < p) ++k;
  return k;
}

}  // namespace

StateSpace::StateSpace(int r, int two_n) : r_(r), two_n_(two_n) {
  if (r < 2) throw std::invalid_argument("StateSpace: need r >= 2");
  if (two_n < 2 || two_n % 2 != 0)
    throw std::invalid_argument("StateSpace: 2N must be a positive even count");
  std::vector<int> alpha(r - 1, 0);
  // Colex order: recurse from the last coordinate so alpha_1 varies fastest.
  std::function<void(int, int)> outer = [&](int pos, int left) {
    if (pos < 0) {
      states_.push_back(alpha);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      alpha[pos] = v;
      outer(pos - 1, left - v);
    }
    alpha[pos] = 0;
  };
  outer(r - 2, two_n);
  for (std::size_t i = 0; i < states_.size(); ++i) index_[states_[i]] = i;
}

std::size_t StateSpace::index_of(const std::vector<int>& alpha) const {
  auto it = index_.find(alpha);
  if (it == index_.end())
    throw std::invalid_argument("StateSpace: state outside the lattice");
  return it->second;
}

std::size_t StateSpace::count_states(int r, int two_n) {
  // C(two_n + r - 1, r - 1) with saturation well above any usable cap.
  unsigned long long res = 1;
  for (int i = 1; i <= r - 1; ++i) {
    const unsigned long long num = static_cast<unsigned long long>(two_n) + i;
    if (res > std::numeric_limits<unsigned long long>::max() / num)
      return std::numeric_limits<std::size_t>::max();
    res = res * num / i;
  }
  return static_cast<std::size_t>(res);
}

ChainDistribution::ChainDistribution(std::shared_ptr<const StateSpace> space,
                                     Vec probs)
    : space_(std::move(space)), probs_(std::move(probs)) {
  if (!space_ || static_cast<std::size_t>(probs_.size()) != space_->size())
    throw std::invalid_argument("ChainDistribution: size mismatch");
}

ChainDistribution ChainDistribution::point_mass(
    std::shared_ptr<const StateSpace> space, const LatticeState& x) {
  if (x.two_n() != space->two_n() ||
      static_cast<int>(x.counts().size()) != space->allele_count() - 1)
    throw std::invalid_argument("point_mass: state/space mismatch");
  Vec p = Vec::Zero(space->size());
  p[space->index_of(x.counts())] = 1.0;
  return ChainDistribution(std::move(space), std::move(p));
}

double ChainDistribution::mass(const LatticeState& x) const {
  return probs_[space_->index_of(x.counts())];
}

ChainDistribution lattice_point_mass(const LatticeState& x,
                                     std::size_t state_cap) {
  const int r = static_cast<int>(x.counts().size()) + 1;
  if (StateSpace::count_states(r, x.two_n()) > state_cap)
    throw capacity_error("lattice state space exceeds the configured cap");
  auto space = std::make_shared<StateSpace>(r, x.two_n());
  return ChainDistribution::point_mass(std::move(space), x);
}

double transition_probability(const LatticeState& from, const LatticeState& to,
                              const MutationMatrix& u) {
  if (from.two_n() != to.two_n() ||
      from.counts().size() != to.counts().size())
    throw std::invalid_argument("transition_probability: state mismatch");
  const int r = u.allele_count();
  if (static_cast<int>(from.counts().size()) != r - 1)
    throw std::invalid_argument("transition_probability: allele mismatch");
  const Vec p_post = adjusted_frequencies_full(from.to_simplex(), u);
  const LogFactorials lf(from.two_n());
  Vec logp(r);
  for (int i = 0; i < r; ++i)
    logp[i] = p_post[i] > 0.0 ? std::log(p_post[i]) : 0.0;
  const double lp = log_multinomial(to.counts(), to.residual(), logp, p_post,
                                    from.two_n(), lf);
  return std::isinf(lp) ? 0.0 : std::exp(lp);
}

namespace {

// Dense kernel cache is worthwhile for repeated steps on small spaces.
constexpr std::size_t kKernelCacheMax = 2048;

Vec push_once(const StateSpace& space, const MutationMatrix& u, const Vec& d) {
  Vec out = Vec::Zero(d.size());
  Vec row;
  for (std::size_t s = 0; s < space.size(); ++s) {
    const double mass = d[s];
    if (mass == 0.0) continue;
    const Vec p_post =
        adjusted_frequencies_full(space.state(s).to_simplex(), u);
    transition_row(space, p_post, row);
    out += mass * row;
  }
  return out;
}

}  // namespace

ChainDistribution evolve_distribution(const ChainDistribution& init,
                                      const MutationMatrix& u, int n) {
  if (n < 0) throw std::invalid_argument("evolve_distribution: n >= 0");
  const StateSpace& space = init.space();
  if (space.allele_count() != u.allele_count())
    throw std::invalid_argument("evolve_distribution: allele mismatch");
  Vec d = init.probabilities();
  if (n == 0) return init;

  if (space.size() <= kKernelCacheMax && n >= 2) {
    Mat kernel(space.size(), space.size());
    Vec row;
    for (std::size_t s = 0; s < space.size(); ++s) {
      const Vec p_post =
          adjusted_frequencies_full(space.state(s).to_simplex(), u);
      transition_row(space, p_post, row);
      kernel.row(s) = row;
    }
    for (int k = 0; k < n; ++k) d = kernel.transpose() * d;
  } else {
    for (int k = 0; k < n; ++k) d = push_once(space, u, d);
  }
  return ChainDistribution(init.space_ptr(), std::move(d));
}

LatticeState sample_step(const LatticeState& y, const MutationMatrix& u,
                         Rng& rng) {
  const int r = u.allele_count();
  if (static_cast<int>(y.counts().size()) != r - 1)
    throw std::invalid_argument("sample_step: allele mismatch");
  const Vec p_post = adjusted_frequencies_full(y.to_simplex(), u);
  std::vector<int> next(r - 1, 0);
  int remaining = y.two_n();
  double denom = 1.0;
  for (int i = 0; i < r - 1 && remaining > 0; ++i) {
    const double p =
        denom > 0.0 ? std::clamp(p_post[i] / denom, 0.0, 1.0) : 0.0;
    next[i] = binomial_draw(remaining, p, rng);
    remaining -= next[i];
    denom = std::max(0.0, denom - p_post[i]);
  }
  return LatticeState(std::move(next), y.population());
}

std::vector<LatticeState> sample_path(const LatticeState& x0,
                                      const MutationMatrix& u, int n,
                                      Rng& rng) {
  if (n < 0) throw std::invalid_argument("sample_path: n >= 0");
  std::vector<LatticeState> path;
  path.reserve(n + 1);
  path.push_back(x0);
  for (int k = 0; k < n; ++k) path.push_back(sample_step(path.back(), u, rng));
  return path;
}

double chain_expectation(const Polynomial& f, const LatticeState& x0,
                         const MutationMatrix& u, int n,
                         std::size_t state_cap) {
  return chain_expectation_at(f, x0, u, {n}, state_cap)[0];
}

std::vector<double> chain_expectation_at(const Polynomial& f,
                                         const LatticeState& x0,
                                         const MutationMatrix& u,
                                         const std::vector<int>& horizons,
                                         std::size_t state_cap) {
  if (horizons.empty())
    throw std::invalid_argument("chain_expectation_at: no horizons");
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (horizons[i] < 0 || (i > 0 && horizons[i] < horizons[i - 1]))
      throw std::invalid_argument(
          "chain_expectation_at: horizons must be nondecreasing and >= 0");
  }
  if (f.dim() != static_cast<int>(x0.counts().size()))
    throw std::invalid_argument("chain_expectation_at: arity mismatch");

  ChainDistribution dist = lattice_point_mass(x0, state_cap);
  const StateSpace& space = dist.space();
  Vec fvals(space.size());
  for (std::size_t s = 0; s < space.size(); ++s)
    fvals[s] = f(space.state(s).to_simplex().coords());

  std::vector<double> out;
  out.reserve(horizons.size());
  int at = 0;
  for (int target : horizons) {
    dist = evolve_distribution(dist, u, target - at);
    at = target;
    out.push_back(dist.probabilities().dot(fvals));
  }
  return out;
}

MonteCarloEstimate chain_expectation_mc(const Polynomial& f,
                                        const LatticeState& x0,
                                        const MutationMatrix& u, int n,
                                        std::int64_t replicates,
                                        std::uint64_t seed, int workers) {
  if (replicates < 2)
    throw std::invalid_argument("chain_expectation_mc: need >= 2 replicates");
  const std::int64_t blocks =
      (replicates + kReplicateBlock - 1) / kReplicateBlock;
  std::vector<double> sums(blocks, 0.0), sqs(blocks, 0.0);
  run_blocks(replicates, kReplicateBlock, workers,
             [&](std::int64_t b, std::int64_t begin, std::int64_t end) {
               double s = 0.0, s2 = 0.0;
               for (std::int64_t i = begin; i < end; ++i) {
                 Rng rng = stream_rng(seed, kChainStreamTag, i);
                 LatticeState y = x0;
                 for (int k = 0; k < n; ++k) y = sample_step(y, u, rng);
                 const double v = f(y.to_simplex().coords());
                 s += v;
                 s2 += v * v;
               }
               sums[b] = s;
               sqs[b] = s2;
             });
  double sum = 0.0, sq = 0.0;
  for (std::int64_t b = 0; b < blocks; ++b) {
    sum += sums[b];
    sq += sqs[b];
  }
  const double mean = sum / replicates;
  const double var =
      std::max(0.0, (sq - replicates * mean * mean) / (replicates - 1));
  return {mean, std::sqrt(var / replicates), replicates};
}

}  // namespace wfdiff
