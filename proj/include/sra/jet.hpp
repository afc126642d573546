#pragma once

#include <functional>
#include <span>
#include <vector>

namespace sra {

/// Truncated multivariate Taylor expansion (degree <= 4, up to 6 variables).
/// Arithmetic on Jets propagates exact mixed partial derivatives through
/// compositions, which is how parameter maps report their derivative arrays
/// without hand-written chain rules or finite differences.
class Jet {
 public:
  static constexpr int kMaxDeg = 4;

  Jet() = default;
  static Jet constant(int nvars, double value);
  static Jet variable(int nvars, int index, double value);

  int nvars() const { return nv_; }
  double value() const { return c_.empty() ? 0.0 : c_[0]; }

  /// Mixed partial d^{|e|} f / prod_i d x_i^{e_i}; |e| <= 4.
  double partial(std::span<const int> exponents) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator+=(double s);
  Jet& operator-=(double s);
  Jet& operator*=(double s);

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, double b) { return a += b; }
  friend Jet operator-(Jet a, double b) { return a -= b; }
  friend Jet operator+(double a, Jet b) { return b += a; }
  friend Jet operator-(double a, const Jet& b) { return (-b) += a; }
  friend Jet operator*(Jet a, double b) { return a *= b; }
  friend Jet operator*(double a, Jet b) { return b *= a; }
  friend Jet operator*(const Jet& a, const Jet& b);
  friend Jet operator/(const Jet& a, const Jet& b);
  friend Jet operator/(Jet a, double b) { return a *= (1.0 / b); }
  friend Jet operator/(double a, const Jet& b);

  /// f(this) for scalar f given by its derivatives f, f', .., f'''' at the
  /// constant term.
  Jet compose(const std::array<double, kMaxDeg + 1>& derivs_at_value) const;

  friend Jet exp(const Jet& x);
  friend Jet log(const Jet& x);
  friend Jet sqrt(const Jet& x);
  friend Jet pow(const Jet& x, double p);
  Jet reciprocal() const;

 private:
  explicit Jet(int nv);
  int nv_ = 0;
  std::vector<double> c_;  // coefficients over the exponent basis for nv_
};

/// Solves g(w, x...) = 0 for w as a Jet, given the free-variable jets and a
/// scalar starting point. Newton iteration in Jet arithmetic; g must be
/// smooth with dg/dw != 0 at the root.
Jet implicit_root(const std::function<Jet(const Jet&, std::span<const Jet>)>& g,
                  std::span<const Jet> args, double w0);

}  // namespace sra
