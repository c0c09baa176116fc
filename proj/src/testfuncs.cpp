#include "wfdiff/testfuncs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace wfdiff {

namespace {

double int_pow(double x, int p) {
  double out = 1.0;
  for (int i = 0; i < p; ++i) out *= x;
  return out;
}

// Walk the lattice {k/steps : k_i >= 0, sum k_i <= steps} in I.
void for_each_grid_point(int dim, int steps,
                         const std::function<void(const Vec&)>& fn) {
  Vec x(dim);
  std::vector<int> k(dim, 0);
  const double h = 1.0 / steps;
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == dim) {
      fn(x);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      k[pos] = v;
      x[pos] = v * h;
      rec(pos + 1, left - v);
    }
  };
  rec(0, steps);
}

}  // namespace

Polynomial::Polynomial(int dim) : dim_(dim) {
  if (dim < 1) throw std::invalid_argument("Polynomial: dim must be >= 1");
}

Polynomial Polynomial::constant(int dim, double c) {
  Polynomial p(dim);
  p.add_term(std::vector<int>(dim, 0), c);
  return p;
}

Polynomial Polynomial::coordinate(int dim, int k) {
  if (k < 0 || k >= dim) throw std::invalid_argument("coordinate index");
  Polynomial p(dim);
  std::vector<int> pow(dim, 0);
  pow[k] = 1;
  p.add_term(pow, 1.0);
  return p;
}

Polynomial Polynomial::from_terms(
    int dim, const std::vector<std::pair<std::vector<int>, double>>& terms) {
  Polynomial p(dim);
  for (const auto& [pow, c] : terms) p.add_term(pow, c);
  return p;
}

void Polynomial::add_term(const std::vector<int>& powers, double coeff) {
  if (static_cast<int>(powers.size()) != dim_)
    throw std::invalid_argument("Polynomial: term arity mismatch");
  int total = 0;
  for (int p : powers) {
    if (p < 0) throw std::invalid_argument("Polynomial: negative exponent");
    total += p;
  }
  if (total > kMaxDegree)
    throw std::invalid_argument("Polynomial: total degree exceeds 6");
  terms_.push_back({powers, coeff});
  canonicalize();
}

void Polynomial::canonicalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.powers < b.powers; });
  std::vector<Term> merged;
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().powers == t.powers)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff == 0.0; });
  terms_ = std::move(merged);
}

int Polynomial::degree() const {
  int deg = 0;
  for (const auto& t : terms_) {
    int total = 0;
    for (int p : t.powers) total += p;
    deg = std::max(deg, total);
  }
  return deg;
}

double Polynomial::operator()(const Vec& x) const {
  if (x.size() != dim_) throw std::invalid_argument("Polynomial: arity");
  double out = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (int i = 0; i < dim_; ++i) v *= int_pow(x[i], t.powers[i]);
    out += v;
  }
  return out;
}

double Polynomial::operator()(double x) const {
  if (dim_ != 1) throw std::invalid_argument("Polynomial: scalar call on dim > 1");
  Vec v(1);
  v[0] = x;
  return (*this)(v);
}

Polynomial Polynomial::partial(int k) const {
  if (k < 0 || k >= dim_) throw std::invalid_argument("partial: index");
  Polynomial out(dim_);
  for (const auto& t : terms_) {
    if (t.powers[k] == 0) continue;
    Term d = t;
    d.coeff *= d.powers[k];
    d.powers[k] -= 1;
    out.terms_.push_back(std::move(d));
  }
  out.canonicalize();
  return out;
}

Polynomial Polynomial::derivative(const std::vector<int>& orders) const {
  if (static_cast<int>(orders.size()) != dim_)
    throw std::invalid_argument("derivative: arity");
  Polynomial out = *this;
  for (int k = 0; k < dim_; ++k)
    for (int j = 0; j < orders[k]; ++j) out = out.partial(k);
  return out;
}

Vec Polynomial::gradient_at(const Vec& x) const {
  Vec g(dim_);
  for (int k = 0; k < dim_; ++k) g[k] = partial(k)(x);
  return g;
}

Mat Polynomial::hessian_at(const Vec& x) const {
  Mat h(dim_, dim_);
  for (int i = 0; i < dim_; ++i) {
    Polynomial pi = partial(i);
    for (int j = i; j < dim_; ++j) h(i, j) = h(j, i) = pi.partial(j)(x);
  }
  return h;
}

Polynomial::NormBound Polynomial::derivative_norm_sup(int m) const {
  const int max_order = dim_ == 1 ? 6 : 4;
  if (m < 1 || m > max_order)
    throw std::domain_error("derivative_norm_sup: unsupported order");

  // Distinct exponent vectors of the m-tuples with their multiplicities.
  std::vector<std::pair<std::vector<int>, double>> parts;
  std::vector<int> orders(dim_, 0);
  std::function<void(int, int)> assign = [&](int pos, int left) {
    if (pos == dim_) {
      if (left == 0) {
        double mult = 1.0;  // m! / prod(orders_k!)
        for (int i = 2; i <= m; ++i) mult *= i;
        for (int k = 0; k < dim_; ++k)
          for (int i = 2; i <= orders[k]; ++i) mult /= i;
        parts.emplace_back(orders, mult);
      }
      return;
    }
    for (int v = 0; v <= left; ++v) {
      orders[pos] = v;
      assign(pos + 1, left - v);
      orders[pos] = 0;
    }
  };
  assign(0, m);

  std::vector<std::pair<Polynomial, double>> comps;  // (d^m f, multiplicity)
  for (const auto& [ord, mult] : parts) {
    Polynomial g = derivative(ord);
    if (!g.is_zero()) comps.emplace_back(std::move(g), mult);
  }
  if (comps.empty()) return {0.0, 0.0};

  auto norm_at = [&](const Vec& x) {
    double s = 0.0;
    for (const auto& [g, mult] : comps) {
      const double v = g(x);
      s += mult * v * v;
    }
    return std::sqrt(s);
  };

  if (degree() <= 2) {
    // Each component is affine, so the squared norm is convex and the
    // supremum sits at a vertex of the simplex.
    Vec x = Vec::Zero(dim_);
    double best = norm_at(x);
    for (int k = 0; k < dim_; ++k) {
      x.setZero();
      x[k] = 1.0;
      best = std::max(best, norm_at(x));
    }
    return {best, 0.0};
  }

  const int steps = 200;
  double best = 0.0;
  for_each_grid_point(dim_, steps,
                      [&](const Vec& x) { best = std::max(best, norm_at(x)); });

  // Lipschitz allowance: |grad of the norm| <= sqrt(sum mult * sup|grad g|^2),
  // with sup|grad g| bounded by coefficient sums (monomials are <= 1 on I).
  double lip_sq = 0.0;
  for (const auto& [g, mult] : comps) {
    double grad_sq = 0.0;
    for (int k = 0; k < dim_; ++k) {
      double coeff_sum = 0.0;
      for (const auto& t : g.partial(k).terms()) coeff_sum += std::fabs(t.coeff);
      grad_sq += coeff_sum * coeff_sum;
    }
    lip_sq += mult * grad_sq;
  }
  const double slack = std::sqrt(lip_sq) * std::sqrt(double(dim_)) / steps;
  return {best, slack};
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    if (!first) os << " + ";
    first = false;
    os << t.coeff;
    for (int i = 0; i < dim_; ++i) {
      if (t.powers[i] == 0) continue;
      os << "*x" << i + 1;
      if (t.powers[i] > 1) os << "^" << t.powers[i];
    }
  }
  return os.str();
}

}  // namespace wfdiff
