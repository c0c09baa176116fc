#include "wfdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "wfdiff/parallel.hpp"

namespace wfdiff {

namespace {

constexpr std::uint64_t kDiffusionStreamTag = 0x64696666ull;
constexpr double kPivotFloor = 1e-12;
constexpr double kPivotNegTol = -1e-10;

// In-place lower Cholesky with zeroed small pivots; `a` is n x n row-major,
// upper part left untouched and ignored by callers.
void chol_floor(double* a, int n) {
  for (int k = 0; k < n; ++k) {
    double d = a[k * n + k];
    for (int j = 0; j < k; ++j) d -= a[k * n + j] * a[k * n + j];
    if (d < kPivotNegTol)
      throw std::domain_error("psd_factor: matrix is not PSD within tolerance");
    if (d < kPivotFloor) {
      for (int i = k; i < n; ++i) a[i * n + k] = 0.0;
      continue;
    }
    const double root = std::sqrt(d);
    a[k * n + k] = root;
    for (int i = k + 1; i < n; ++i) {
      double v = a[i * n + k];
      for (int j = 0; j < k; ++j) v -= a[i * n + j] * a[k * n + j];
      a[i * n + k] = v / root;
    }
  }
}

// Euclidean projection of v onto {w >= 0, sum w = 1}, in place.
void project_standard_simplex(std::vector<double>& v,
                              std::vector<double>& scratch) {
  const int n = static_cast<int>(v.size());
  scratch.assign(v.begin(), v.end());
  std::sort(scratch.begin(), scratch.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  int rho = 0;
  for (int j = 0; j < n; ++j) {
    cum += scratch[j];
    const double t = (cum - 1.0) / (j + 1);
    if (scratch[j] - t > 0.0) {
      rho = j + 1;
      theta = t;
    }
  }
  (void)rho;
  for (double& w : v) w = std::max(w - theta, 0.0);
}

// Allocation-free Euler-Maruyama stepper over raw buffers.
struct Stepper {
  Stepper(const DiffusionConfig& cfg)
      : r(cfg.mutation.allele_count()),
        d(r - 1),
        dt(cfg.dt),
        root_step(std::sqrt(cfg.dt / (2.0 * cfg.population))),
        ucol(r * r),
        outflow(r),
        x(d),
        xf(r),
        b(d),
        a(d * d),
        xi(d),
        lift(r),
        scratch(r) {
    for (int i = 0; i < r; ++i) {
      outflow[i] = cfg.mutation.row_outflow(i);
      for (int j = 0; j < r; ++j) ucol[i * r + j] = cfg.mutation.rate(j, i);
    }
  }

  void reset(const Vec& x0) {
    for (int i = 0; i < d; ++i) x[i] = x0[i];
  }

  void load_noise(Rng& rng) {
    for (int j = 0; j < d; ++j) xi[j] = rng.normal();
  }

  void step() {
    double sum = 0.0;
    for (int i = 0; i < d; ++i) sum += x[i];
    xf[d] = std::max(0.0, 1.0 - sum);
    for (int i = 0; i < d; ++i) xf[i] = x[i];

    for (int i = 0; i < d; ++i) {
      double v = -xf[i] * outflow[i];
      const double* col = &ucol[i * r];
      for (int j = 0; j < r; ++j) v += xf[j] * col[j];
      b[i] = v;
    }

    for (int i = 0; i < d; ++i) {
      for (int j = 0; j <= i; ++j) a[i * d + j] = -x[i] * x[j];
      a[i * d + i] += x[i];
    }
    chol_floor(a.data(), d);

    double total = 0.0;
    bool inside = true;
    for (int i = 0; i < d; ++i) {
      double noise = 0.0;
      for (int j = 0; j <= i; ++j) noise += a[i * d + j] * xi[j];
      x[i] += b[i] * dt + root_step * noise;
      if (x[i] < 0.0) inside = false;
      total += x[i];
    }
    if (total > 1.0) inside = false;
    if (!inside) {
      for (int i = 0; i < d; ++i) lift[i] = x[i];
      lift[d] = 1.0 - total;
      project_standard_simplex(lift, scratch);
      for (int i = 0; i < d; ++i) x[i] = lift[i];
    }
  }

  int r, d;
  double dt, root_step;
  std::vector<double> ucol, outflow;
  std::vector<double> x, xf, b, a, xi, lift, scratch;
};

}  // namespace

DiffusionConfig::DiffusionConfig(int population_, MutationMatrix mutation_,
                                 double dt_)
    : population(population_), mutation(std::move(mutation_)), dt(dt_) {
  if (population < 1)
    throw std::invalid_argument("DiffusionConfig: population >= 1");
  if (!(dt > 0.0 && dt <= 1.0))
    throw std::invalid_argument("DiffusionConfig: dt in (0, 1]");
}

std::int64_t DiffusionConfig::steps_for(double t) const {
  if (t < 0.0) throw std::invalid_argument("steps_for: t >= 0");
  const std::int64_t k = std::llround(t / dt);
  if (std::fabs(k * dt - t) > 1e-9 * std::max(1.0, t))
    throw std::invalid_argument("steps_for: t must be a multiple of dt");
  return k;
}

Mat psd_factor(const Mat& a) {
  if (a.rows() != a.cols())
    throw std::invalid_argument("psd_factor: square matrix required");
  const int n = static_cast<int>(a.rows());
  std::vector<double> buf(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) buf[i * n + j] = a(i, j);
  chol_floor(buf.data(), n);
  Mat l = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) l(i, j) = buf[i * n + j];
  return l;
}

Vec project_to_simplex(const Vec& x) {
  const int d = static_cast<int>(x.size());
  std::vector<double> lift(d + 1), scratch(d + 1);
  double sum = 0.0;
  for (int i = 0; i < d; ++i) {
    lift[i] = x[i];
    sum += x[i];
  }
  lift[d] = 1.0 - sum;
  project_standard_simplex(lift, scratch);
  Vec out(d);
  for (int i = 0; i < d; ++i) out[i] = lift[i];
  return out;
}

SimplexPoint em_step(const SimplexPoint& x, const DiffusionConfig& cfg,
                     Rng& rng) {
  if (x.allele_count() != cfg.mutation.allele_count())
    throw std::invalid_argument("em_step: allele mismatch");
  Stepper st(cfg);
  st.reset(x.coords());
  st.load_noise(rng);
  st.step();
  Vec out(st.d);
  for (int i = 0; i < st.d; ++i) out[i] = st.x[i];
  return SimplexPoint(std::move(out));
}

SimplexPoint em_step_with_noise(const SimplexPoint& x,
                                const DiffusionConfig& cfg, const Vec& noise) {
  if (x.allele_count() != cfg.mutation.allele_count())
    throw std::invalid_argument("em_step_with_noise: allele mismatch");
  if (noise.size() != x.dim())
    throw std::invalid_argument("em_step_with_noise: noise arity");
  Stepper st(cfg);
  st.reset(x.coords());
  for (int j = 0; j < st.d; ++j) st.xi[j] = noise[j];
  st.step();
  Vec out(st.d);
  for (int i = 0; i < st.d; ++i) out[i] = st.x[i];
  return SimplexPoint(std::move(out));
}

DiffusionPath sample_diffusion_path(const SimplexPoint& x0,
                                    const DiffusionConfig& cfg, double t_max,
                                    Rng& rng) {
  const std::int64_t steps = cfg.steps_for(t_max);
  Stepper st(cfg);
  st.reset(x0.coords());
  DiffusionPath path;
  path.dt = cfg.dt;
  path.states.reserve(steps + 1);
  path.states.push_back(x0.coords());
  for (std::int64_t k = 0; k < steps; ++k) {
    st.load_noise(rng);
    st.step();
    Vec v(st.d);
    for (int i = 0; i < st.d; ++i) v[i] = st.x[i];
    path.states.push_back(std::move(v));
  }
  return path;
}

MonteCarloEstimate weak_expectation(const Polynomial& f, const SimplexPoint& x0,
                                    const DiffusionConfig& cfg, double t,
                                    std::int64_t replicates, std::uint64_t seed,
                                    int workers) {
  return weak_expectation_at(f, x0, cfg, {t}, replicates, seed, workers)[0];
}

std::vector<MonteCarloEstimate> weak_expectation_at(
    const Polynomial& f, const SimplexPoint& x0, const DiffusionConfig& cfg,
    const std::vector<double>& times, std::int64_t replicates,
    std::uint64_t seed, int workers) {
  if (replicates < 2)
    throw std::invalid_argument("weak_expectation: need >= 2 replicates");
  if (times.empty()) throw std::invalid_argument("weak_expectation: no times");
  if (f.dim() != x0.dim())
    throw std::invalid_argument("weak_expectation: arity mismatch");
  if (x0.allele_count() != cfg.mutation.allele_count())
    throw std::invalid_argument("weak_expectation: allele mismatch");

  const int nt = static_cast<int>(times.size());
  std::vector<std::int64_t> marks(nt);
  for (int s = 0; s < nt; ++s) {
    marks[s] = cfg.steps_for(times[s]);
    if (s > 0 && marks[s] < marks[s - 1])
      throw std::invalid_argument("weak_expectation: times must be nondecreasing");
  }
  const std::int64_t total_steps = marks.back();

  const std::int64_t blocks =
      (replicates + kReplicateBlock - 1) / kReplicateBlock;
  std::vector<double> sums(blocks * nt, 0.0), sqs(blocks * nt, 0.0);

  run_blocks(replicates, kReplicateBlock, workers,
             [&](std::int64_t blk, std::int64_t begin, std::int64_t end) {
               Stepper st(cfg);
               Vec probe(st.d);
               std::vector<double> s(nt, 0.0), s2(nt, 0.0);
               for (std::int64_t i = begin; i < end; ++i) {
                 Rng rng = stream_rng(seed, kDiffusionStreamTag, i);
                 st.reset(x0.coords());
                 int slot = 0;
                 for (std::int64_t k = 0; k <= total_steps; ++k) {
                   while (slot < nt && marks[slot] == k) {
                     for (int c = 0; c < st.d; ++c) probe[c] = st.x[c];
                     const double v = f(probe);
                     s[slot] += v;
                     s2[slot] += v * v;
                     ++slot;
                   }
                   if (k == total_steps) break;
                   st.load_noise(rng);
                   st.step();
                 }
               }
               for (int t2 = 0; t2 < nt; ++t2) {
                 sums[blk * nt + t2] = s[t2];
                 sqs[blk * nt + t2] = s2[t2];
               }
             });

  std::vector<MonteCarloEstimate> out(nt);
  for (int s = 0; s < nt; ++s) {
    double sum = 0.0, sq = 0.0;
    for (std::int64_t b = 0; b < blocks; ++b) {
      sum += sums[b * nt + s];
      sq += sqs[b * nt + s];
    }
    const double mean = sum / replicates;
    const double var =
        std::max(0.0, (sq - replicates * mean * mean) / (replicates - 1));
    out[s] = {mean, std::sqrt(var / replicates), replicates};
  }
  return out;
}

double generator_apply(const Polynomial& f, const SimplexPoint& x,
                       int population, const MutationMatrix& u) {
  if (population < 1) throw std::invalid_argument("generator_apply: population");
  if (f.dim() != x.dim() || x.allele_count() != u.allele_count())
    throw std::invalid_argument("generator_apply: arity mismatch");
  const Mat a = covariance(x);
  const Mat h = f.hessian_at(x.coords());
  const Vec b = drift(x, u);
  const Vec g = f.gradient_at(x.coords());
  return a.cwiseProduct(h).sum() / (4.0 * population) + b.dot(g);
}

double holder_modulus_check_r2(std::int64_t pairs, Rng& rng) {
  if (pairs < 1) throw std::invalid_argument("holder check: pairs >= 1");
  auto sigma = [](double x) { return std::sqrt(x * (1.0 - x)); };
  double worst = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < pairs; ++i) {
    const double x = rng.uniform();
    const double y = rng.uniform();
    const double diff = sigma(x) - sigma(y);
    worst = std::max(worst, diff * diff - 2.0 * std::fabs(x - y));
  }
  return worst;
}

}  // namespace wfdiff
