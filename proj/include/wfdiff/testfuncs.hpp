#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace wfdiff {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Sparse multivariate polynomial on the simplex domain
// I = {x in R^dim : x_i >= 0, sum x_i <= 1}, total degree capped at 6.
// Derivatives are exact; sup-norms over I are exact for degree <= 2 and
// otherwise grid upper bounds with an explicit Lipschitz slack.
class Polynomial {
 public:
  static constexpr int kMaxDegree = 6;

  struct Term {
    std::vector<int> powers;
    double coeff;
  };

  // Reported sup-norm: `value` is the grid (or exact) maximum and `slack`
  // an additive allowance such that value + slack >= true supremum.
  struct NormBound {
    double value = 0.0;
    double slack = 0.0;
    double upper() const { return value + slack; }
  };

  explicit Polynomial(int dim);
  static Polynomial constant(int dim, double c);
  static Polynomial coordinate(int dim, int k);  // x_k
  static Polynomial from_terms(int dim,
                               const std::vector<std::pair<std::vector<int>, double>>& terms);

  void add_term(const std::vector<int>& powers, double coeff);

  int dim() const { return dim_; }
  int degree() const;
  bool is_zero() const { return terms_.empty(); }
  const std::vector<Term>& terms() const { return terms_; }

  double operator()(const Vec& x) const;
  double operator()(double x) const;  // dim == 1 convenience

  Polynomial partial(int k) const;
  // Mixed derivative by exponent vector (order of ∂/∂x_k given per coordinate).
  Polynomial derivative(const std::vector<int>& orders) const;

  Vec gradient_at(const Vec& x) const;
  Mat hessian_at(const Vec& x) const;

  // sup over I of the Euclidean norm of the order-m derivative tensor,
  // i.e. of sqrt(sum over all m-tuples (k_1..k_m) of (d^m f)^2).
  // m = 1 is the gradient norm, m = 2 the Hessian Frobenius norm.
  // Supported orders: 1..6 for dim == 1, 1..4 otherwise.
  NormBound derivative_norm_sup(int m) const;

  std::string to_string() const;

 private:
  void canonicalize();

  int dim_;
  std::vector<Term> terms_;
};

}  // namespace wfdiff
