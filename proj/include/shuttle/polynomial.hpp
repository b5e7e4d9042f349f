#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace shuttle::poly {

// Coefficient vectors hold c_0 .. c_n of sum_j c_j x^j.

template <typename Derived>
typename Derived::Scalar evaluate(const Eigen::MatrixBase<Derived>& c,
                                  typename Derived::Scalar x) {
  using Scalar = typename Derived::Scalar;
  Scalar acc(0);
  for (Eigen::Index j = c.size() - 1; j >= 0; --j) acc = acc * x + c(j);
  return acc;
}

/// Value of the order-th derivative at x, without forming the derivative coefficients.
template <typename Derived>
typename Derived::Scalar evaluate_derivative(const Eigen::MatrixBase<Derived>& c,
                                             typename Derived::Scalar x, int order) {
  using Scalar = typename Derived::Scalar;
  Scalar acc(0);
  for (Eigen::Index j = c.size() - 1; j >= order; --j) {
    Scalar falling(1);
    for (int r = 0; r < order; ++r) falling *= Scalar(j - r);
    acc = acc * x + falling * c(j);
  }
  return acc;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> derivative(
    const Eigen::MatrixBase<Derived>& c, int order = 1) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = std::max<Eigen::Index>(c.size() - order, 1);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n);
  for (Eigen::Index j = order; j < c.size(); ++j) {
    Scalar falling(1);
    for (int r = 0; r < order; ++r) falling *= Scalar(j - r);
    out(j - order) = falling * c(j);
  }
  return out;
}

/// Lag overlap L(sigma) = int_0^{1-sigma} b(x) b(x+sigma) dx of a polynomial b on [0, 1].
///
/// Exact for every sigma in [0, 1]: b(x+sigma) is expanded binomially and the x-integral
/// is taken in closed form in powers of (1 - sigma).
template <typename Scalar>
class LagOverlap {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  explicit LagOverlap(Vector b) : b_(std::move(b)) {
    const Eigen::Index n = b_.size();
    binomial_ = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      binomial_(j, 0) = Scalar(1);
      for (Eigen::Index i = 1; i <= j; ++i)
        binomial_(j, i) = binomial_(j - 1, i - 1) + (i < j ? binomial_(j - 1, i) : Scalar(0));
    }
  }

  Scalar operator()(Scalar sigma) const {
    const Eigen::Index n = b_.size();
    const Scalar rest = Scalar(1) - sigma;
    // tail(i) = sum_a b_a rest^(a+i+1) / (a+i+1)
    Vector tail(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Scalar acc(0);
      Scalar power = std::pow(rest, Scalar(i + 1));
      for (Eigen::Index a = 0; a < n; ++a) {
        acc += b_(a) * power / Scalar(a + i + 1);
        power *= rest;
      }
      tail(i) = acc;
    }
    Scalar total(0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (b_(j) == Scalar(0)) continue;
      Scalar inner(0);
      Scalar sigma_power(1);  // sigma^(j-i), filled from i = j downwards
      for (Eigen::Index i = j; i >= 0; --i) {
        inner += binomial_(j, i) * sigma_power * tail(i);
        sigma_power *= sigma;
      }
      total += b_(j) * inner;
    }
    return total;
  }

  const Vector& coefficients() const { return b_; }

 private:
  Vector b_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> binomial_;
};

}  // namespace shuttle::poly
