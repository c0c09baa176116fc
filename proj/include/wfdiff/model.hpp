#pragma once

#include <Eigen/Core>
#include <vector>

#include "wfdiff/testfuncs.hpp"

namespace wfdiff {

inline constexpr double kSimplexTol = 1e-12;

// Mutation rate matrix u for r alleles under the structural assumption
//   u_ii = 0  and  u_ki = u_ri for every k != i (i <= r-1),
// so the matrix is determined by its last row plus the per-row rate into
// allele r. Row sums must not exceed 1 so that adjusted frequencies stay
// in the simplex.
class MutationMatrix {
 public:
  static MutationMatrix zero(int r);
  static MutationMatrix two_allele(double u12, double u21);
  // last_row = (u_{r,1}, ..., u_{r,r-1}), into_last = (u_{1,r}, ..., u_{r-1,r}).
  static MutationMatrix from_last_row(const Eigen::VectorXd& last_row,
                                      const Eigen::VectorXd& into_last);
  // Full r x r matrix; rejects violations of the structural assumption.
  static MutationMatrix from_matrix(const Mat& u);

  int allele_count() const { return r_; }
  const Mat& matrix() const { return u_; }
  double rate(int i, int j) const { return u_(i, j); }  // 0-based

  double row_outflow(int i) const { return outflow_[i]; }   // sum_j u_ij
  double into_rate(int i) const { return u_(r_ - 1, i); }   // u_{r,i}, i <= r-2
  // Per-coordinate decay weight: sum_j u_kj + u_rk, k in 0..r-2.
  double rate_sum(int k) const { return outflow_[k] + u_(r_ - 1, k); }

  bool is_zero() const;

 private:
  MutationMatrix(int r, Mat u);
  void validate() const;

  int r_;
  Mat u_;
  std::vector<double> outflow_;
};

// Point of the closed simplex I = {x : x_i >= 0, sum_{i<r} x_i <= 1},
// stored by its first r-1 coordinates. Inputs within kSimplexTol of I are
// clamped onto it; anything further out is rejected.
class SimplexPoint {
 public:
  explicit SimplexPoint(Vec coords);
  static SimplexPoint vertex(int r, int allele);  // allele in 0..r-1

  int dim() const { return static_cast<int>(x_.size()); }  // r-1
  int allele_count() const { return dim() + 1; }
  const Vec& coords() const { return x_; }
  double operator[](int i) const { return x_[i]; }
  double last() const;  // x_r = 1 - sum

 private:
  Vec x_;
};

// Counts alpha on the lattice I_{2N}: alpha_i >= 0, sum alpha_i <= 2N.
class LatticeState {
 public:
  LatticeState(std::vector<int> counts, int population);

  int population() const { return n_; }  // N
  int two_n() const { return 2 * n_; }
  const std::vector<int>& counts() const { return counts_; }
  int count(int i) const { return counts_[i]; }
  int residual() const;  // alpha_r = 2N - sum
  SimplexPoint to_simplex() const;

  bool operator==(const LatticeState& o) const = default;

 private:
  std::vector<int> counts_;
  int n_;
};

// Post-mutation allele frequencies: y#_i = y_i (1 - sum_j u_ij) + sum_j u_ji y_j.
SimplexPoint adjusted_frequencies(const SimplexPoint& y, const MutationMatrix& u);
// Same, over all r alleles (sums to 1).
Vec adjusted_frequencies_full(const SimplexPoint& y, const MutationMatrix& u);

// Drift b(x) of the limiting diffusion; equals adjusted_frequencies(x) - x.
Vec drift(const SimplexPoint& x, const MutationMatrix& u);

// Covariance a_ij(x) = x_i (delta_ij - x_j), PSD on I.
Mat covariance(const SimplexPoint& x);

// Covariance-norm constant used by the multi-allele error bounds:
// sqrt(r-2)/(r-1), the Hilbert-Schmidt norm of covariance() at the balanced
// point x_i = 1/(r-1). For r = 3 this equals the sup of the norm over I; for
// r >= 4 the norm over I also reaches 1/2 at two coordinates equal to 1/2, so
// the constant understates that sup there. Requires r >= 3 (kept verbatim as
// the bound coefficient; the scalar case maxes |a| at 1/4).
double covariance_norm_sup(int r);

// sup over I of |b(x)|_2 under the structural assumption, attained at the
// vertex of the coordinate maximizing rate_sum; ties break to the smallest index.
struct DriftNormSup {
  double value;
  int argmax;  // 0-based coordinate
};
DriftNormSup drift_norm_sup(const MutationMatrix& u);

// max_k rate_sum(k) over k in 0..r-2.
double rate_sum_max(const MutationMatrix& u);

// Exact moments of the one-step shift Y(1) - y given Y(0) = y in I_{2N}:
// mean b(y), the second moment matrix E[(Y(1)-y)(Y(1)-y)^T], and the
// diagonal third moments E[(Y(1)-y)_i^3].
struct StepMoments {
  Vec mean_shift;
  Mat second;
  Vec third_diag;
};
StepMoments one_step_moments(const LatticeState& y, const MutationMatrix& u);

// Face checks for the martingale problem: on face `face` (0..r-2: x_i = 0;
// r-1: sum x = 1) the outward normal nu has zero diffusion flux and
// nonnegative inward drift. Returns both quantities.
struct FaceCheck {
  double diffusion_normal;  // <nu, (A/2N) nu>
  double drift_inward;      // <nu, b>
};
FaceCheck boundary_face_check(const SimplexPoint& x, int face,
                              const MutationMatrix& u, int population);

}  // namespace wfdiff
