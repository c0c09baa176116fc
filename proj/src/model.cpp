#include "wfdiff/model.hpp"

#include <cmath>
#include <stdexcept>

namespace wfdiff {

namespace {

Vec to_full(const SimplexPoint& x) {
  const int r = x.allele_count();
  Vec full(r);
  full.head(r - 1) = x.coords();
  full[r - 1] = x.last();
  return full;
}

}  // namespace

MutationMatrix::MutationMatrix(int r, Mat u) : r_(r), u_(std::move(u)) {
  validate();
  outflow_.resize(r_);
  for (int i = 0; i < r_; ++i) outflow_[i] = u_.row(i).sum();
  for (int i = 0; i < r_; ++i) {
    if (outflow_[i] > 1.0 + kSimplexTol)
      throw std::invalid_argument("MutationMatrix: row sum exceeds 1");
  }
}

void MutationMatrix::validate() const {
  if (r_ < 2) throw std::invalid_argument("MutationMatrix: need r >= 2");
  if (u_.rows() != r_ || u_.cols() != r_)
    throw std::invalid_argument("MutationMatrix: shape mismatch");
  for (int i = 0; i < r_; ++i)
    for (int j = 0; j < r_; ++j) {
      const double v = u_(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("MutationMatrix: rates must lie in [0,1]");
    }
  for (int i = 0; i < r_; ++i)
    if (u_(i, i) != 0.0)
      throw std::invalid_argument("MutationMatrix: diagonal must be zero");
  for (int i = 0; i < r_ - 1; ++i)
    for (int k = 0; k < r_; ++k) {
      if (k == i) continue;
      if (std::fabs(u_(k, i) - u_(r_ - 1, i)) > 1e-14)
        throw std::invalid_argument(
            "MutationMatrix: column entries must match the last row");
    }
}

MutationMatrix MutationMatrix::zero(int r) {
  return MutationMatrix(r, Mat::Zero(r, r));
}

MutationMatrix MutationMatrix::two_allele(double u12, double u21) {
  Mat u = Mat::Zero(2, 2);
  u(0, 1) = u12;
  u(1, 0) = u21;
  return MutationMatrix(2, std::move(u));
}

MutationMatrix MutationMatrix::from_last_row(const Eigen::VectorXd& last_row,
                                             const Eigen::VectorXd& into_last) {
  if (last_row.size() != into_last.size() || last_row.size() < 1)
    throw std::invalid_argument("MutationMatrix: need r-1 rates per vector");
  const int r = static_cast<int>(last_row.size()) + 1;
  Mat u = Mat::Zero(r, r);
  for (int i = 0; i < r - 1; ++i)
    for (int k = 0; k < r; ++k)
      if (k != i) u(k, i) = last_row[i];
  for (int k = 0; k < r - 1; ++k) u(k, r - 1) = into_last[k];
  return MutationMatrix(r, std::move(u));
}

MutationMatrix MutationMatrix::from_matrix(const Mat& u) {
  if (u.rows() != u.cols() || u.rows() < 2)
    throw std::invalid_argument("MutationMatrix: need a square matrix, r >= 2");
  const int r = static_cast<int>(u.rows());
  // Canonicalize columns onto the last row so the structural identity is
  // exact in arithmetic; the probe pass rejects near-misses beyond 1e-14.
  (void)MutationMatrix(r, u);
  Eigen::VectorXd last_row(r - 1), into_last(r - 1);
  for (int i = 0; i < r - 1; ++i) last_row[i] = u(r - 1, i);
  for (int k = 0; k < r - 1; ++k) into_last[k] = u(k, r - 1);
  return from_last_row(last_row, into_last);
}

bool MutationMatrix::is_zero() const { return u_.isZero(0.0); }

SimplexPoint::SimplexPoint(Vec coords) : x_(std::move(coords)) {
  if (x_.size() < 1) throw std::invalid_argument("SimplexPoint: empty");
  double sum = 0.0;
  for (int i = 0; i < x_.size(); ++i) {
    if (!(x_[i] >= -kSimplexTol))
      throw std::domain_error("SimplexPoint: coordinate below the simplex");
    if (x_[i] < 0.0) x_[i] = 0.0;
    sum += x_[i];
  }
  if (!(sum <= 1.0 + kSimplexTol))
    throw std::domain_error("SimplexPoint: coordinates sum beyond 1");
  if (sum > 1.0) x_ *= 1.0 / sum;
}

SimplexPoint SimplexPoint::vertex(int r, int allele) {
  if (r < 2 || allele < 0 || allele >= r)
    throw std::invalid_argument("SimplexPoint::vertex: bad index");
  Vec x = Vec::Zero(r - 1);
  if (allele < r - 1) x[allele] = 1.0;
  return SimplexPoint(std::move(x));
}

double SimplexPoint::last() const {
  return std::max(0.0, 1.0 - x_.sum());
}

LatticeState::LatticeState(std::vector<int> counts, int population)
    : counts_(std::move(counts)), n_(population) {
  if (n_ < 1) throw std::invalid_argument("LatticeState: population must be >= 1");
  if (counts_.empty()) throw std::invalid_argument("LatticeState: empty counts");
  long sum = 0;
  for (int c : counts_) {
    if (c < 0) throw std::invalid_argument("LatticeState: negative count");
    sum += c;
  }
  if (sum > 2L * n_)
    throw std::invalid_argument("LatticeState: counts exceed 2N");
}

int LatticeState::residual() const {
  int sum = 0;
  for (int c : counts_) sum += c;
  return two_n() - sum;
}

SimplexPoint LatticeState::to_simplex() const {
  Vec x(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i)
    x[i] = static_cast<double>(counts_[i]) / two_n();
  return SimplexPoint(std::move(x));
}

Vec adjusted_frequencies_full(const SimplexPoint& y, const MutationMatrix& u) {
  const int r = u.allele_count();
  if (y.allele_count() != r)
    throw std::invalid_argument("adjusted_frequencies: allele count mismatch");
  const Vec yf = to_full(y);
  Vec out(r);
  for (int i = 0; i < r; ++i) {
    double v = yf[i] * (1.0 - u.row_outflow(i));
    for (int j = 0; j < r; ++j) v += u.rate(j, i) * yf[j];
    out[i] = v;
  }
  return out;
}

SimplexPoint adjusted_frequencies(const SimplexPoint& y, const MutationMatrix& u) {
  Vec full = adjusted_frequencies_full(y, u);
  return SimplexPoint(full.head(u.allele_count() - 1));
}

Vec drift(const SimplexPoint& x, const MutationMatrix& u) {
  const int r = u.allele_count();
  if (x.allele_count() != r)
    throw std::invalid_argument("drift: allele count mismatch");
  const Vec xf = to_full(x);
  Vec b(r - 1);
  for (int i = 0; i < r - 1; ++i) {
    double v = -xf[i] * u.row_outflow(i);
    for (int j = 0; j < r; ++j) v += xf[j] * u.rate(j, i);
    b[i] = v;
  }
  return b;
}

Mat covariance(const SimplexPoint& x) {
  const Vec& v = x.coords();
  Mat a = -v * v.transpose();
  a.diagonal() += v;
  return a;
}

double covariance_norm_sup(int r) {
  if (r < 3)
    throw std::domain_error("covariance_norm_sup: defined for r >= 3");
  return std::sqrt(static_cast<double>(r - 2)) / (r - 1);
}

DriftNormSup drift_norm_sup(const MutationMatrix& u) {
  const int r = u.allele_count();
  int best = 0;
  for (int k = 1; k < r - 1; ++k)
    if (u.rate_sum(k) > u.rate_sum(best)) best = k;
  double sq = u.row_outflow(best) * u.row_outflow(best);
  for (int i = 0; i < r - 1; ++i) {
    if (i == best) continue;
    sq += u.into_rate(i) * u.into_rate(i);
  }
  return {std::sqrt(sq), best};
}

double rate_sum_max(const MutationMatrix& u) {
  double best = 0.0;
  for (int k = 0; k < u.allele_count() - 1; ++k)
    best = std::max(best, u.rate_sum(k));
  return best;
}

StepMoments one_step_moments(const LatticeState& y, const MutationMatrix& u) {
  const int r = u.allele_count();
  if (static_cast<int>(y.counts().size()) != r - 1)
    throw std::invalid_argument("one_step_moments: allele count mismatch");
  const double two_n = y.two_n();
  const SimplexPoint ys = y.to_simplex();
  const Vec yp = adjusted_frequencies_full(ys, u);

  StepMoments m;
  m.mean_shift = drift(ys, u);
  m.second.resize(r - 1, r - 1);
  m.third_diag.resize(r - 1);
  for (int i = 0; i < r - 1; ++i) {
    const double bi = m.mean_shift[i];
    const double pi = yp[i];
    for (int j = 0; j < r - 1; ++j) {
      if (i == j) continue;
      m.second(i, j) = bi * m.mean_shift[j] - pi * yp[j] / two_n;
    }
    m.second(i, i) = bi * bi + pi * (1.0 - pi) / two_n;
    m.third_diag[i] = pi * (1.0 - 2.0 * pi) * (1.0 - pi) / (two_n * two_n) +
                      3.0 * pi * (1.0 - pi) * bi / two_n + bi * bi * bi;
  }
  return m;
}

FaceCheck boundary_face_check(const SimplexPoint& x, int face,
                              const MutationMatrix& u, int population) {
  const int r = u.allele_count();
  if (x.allele_count() != r)
    throw std::invalid_argument("boundary_face_check: allele count mismatch");
  if (face < 0 || face >= r)
    throw std::invalid_argument("boundary_face_check: face index");
  if (population < 1)
    throw std::invalid_argument("boundary_face_check: population");

  if (face < r - 1) {
    if (std::fabs(x[face]) > kSimplexTol)
      throw std::domain_error("boundary_face_check: point not on the face");
  } else if (x.last() > kSimplexTol) {
    throw std::domain_error("boundary_face_check: point not on the face");
  }

  const Mat a = covariance(x);
  const Vec b = drift(x, u);
  const double two_n = 2.0 * population;
  FaceCheck out{};
  if (face < r - 1) {
    out.diffusion_normal = a(face, face) / two_n;
    out.drift_inward = b[face];
  } else {
    out.diffusion_normal = a.sum() / two_n;
    out.drift_inward = -b.sum();
  }
  return out;
}

}  // namespace wfdiff
