#include "sra/jet.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace sra {
namespace {

constexpr int kMaxVars = 6;

struct Basis {
  std::vector<std::array<int, kMaxVars>> exps;  // exponent tuples, |e| <= 4
  std::vector<int> total;                       // |e| per entry
  // multiplication triples (ia, ib, iout)
  std::vector<std::array<int, 3>> mul;
  std::vector<double> fact;  // prod of e_i! per entry
};

const Basis& basis(int nv) {
  static std::array<Basis, kMaxVars + 1> cache;
  static std::array<std::once_flag, kMaxVars + 1> flags;
  if (nv < 1 || nv > kMaxVars) throw std::invalid_argument("Jet: nvars out of range");
  std::call_once(flags[static_cast<std::size_t>(nv)], [nv] {
    Basis& b = cache[static_cast<std::size_t>(nv)];
    std::array<int, kMaxVars> e{};
    auto rec = [&](auto&& self, int var, int remaining) -> void {
      if (var == nv) {
        b.exps.push_back(e);
        int t = 0;
        double f = 1.0;
        for (int i = 0; i < nv; ++i) {
          t += e[static_cast<std::size_t>(i)];
          for (int k = 2; k <= e[static_cast<std::size_t>(i)]; ++k) f *= k;
        }
        b.total.push_back(t);
        b.fact.push_back(f);
        return;
      }
      for (int v = 0; v <= remaining; ++v) {
        e[static_cast<std::size_t>(var)] = v;
        self(self, var + 1, remaining - v);
      }
      e[static_cast<std::size_t>(var)] = 0;
    };
    rec(rec, 0, Jet::kMaxDeg);

    auto find = [&](const std::array<int, kMaxVars>& q) -> int {
      for (std::size_t i = 0; i < b.exps.size(); ++i) {
        if (b.exps[i] == q) return static_cast<int>(i);
      }
      return -1;
    };
    for (std::size_t ia = 0; ia < b.exps.size(); ++ia) {
      for (std::size_t ib = 0; ib < b.exps.size(); ++ib) {
        if (b.total[ia] + b.total[ib] > Jet::kMaxDeg) continue;
        std::array<int, kMaxVars> q{};
        for (int i = 0; i < nv; ++i) {
          q[static_cast<std::size_t>(i)] =
              b.exps[ia][static_cast<std::size_t>(i)] +
              b.exps[ib][static_cast<std::size_t>(i)];
        }
        b.mul.push_back({static_cast<int>(ia), static_cast<int>(ib), find(q)});
      }
    }
  });
  return cache[static_cast<std::size_t>(nv)];
}

}  // namespace

Jet::Jet(int nv) : nv_(nv), c_(basis(nv).exps.size(), 0.0) {}

Jet Jet::constant(int nvars, double value) {
  Jet j(nvars);
  j.c_[0] = value;
  return j;
}

Jet Jet::variable(int nvars, int index, double value) {
  Jet j(nvars);
  j.c_[0] = value;
  const Basis& b = basis(nvars);
  for (std::size_t i = 0; i < b.exps.size(); ++i) {
    if (b.total[i] == 1 && b.exps[i][static_cast<std::size_t>(index)] == 1) {
      j.c_[i] = 1.0;
      break;
    }
  }
  return j;
}

double Jet::partial(std::span<const int> exponents) const {
  const Basis& b = basis(nv_);
  std::array<int, kMaxVars> q{};
  for (int i = 0; i < nv_; ++i) q[static_cast<std::size_t>(i)] = exponents[i];
  for (std::size_t i = 0; i < b.exps.size(); ++i) {
    if (b.exps[i] == q) return c_[i] * b.fact[i];
  }
  throw std::invalid_argument("Jet::partial: exponent out of basis");
}

Jet Jet::operator-() const {
  Jet r = *this;
  for (double& v : r.c_) v = -v;
  return r;
}

Jet& Jet::operator+=(const Jet& o) {
  if (nv_ == 0) {
    *this = o;
    return *this;
  }
  if (o.nv_ == 0) return *this;
  if (nv_ != o.nv_) throw std::invalid_argument("Jet: nvars mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& o) {
  if (nv_ == 0) {
    *this = -o;
    return *this;
  }
  if (o.nv_ == 0) return *this;
  if (nv_ != o.nv_) throw std::invalid_argument("Jet: nvars mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
  return *this;
}

Jet& Jet::operator+=(double s) {
  if (nv_ == 0) throw std::invalid_argument("Jet: uninitialised");
  c_[0] += s;
  return *this;
}

Jet& Jet::operator-=(double s) { return *this += (-s); }

Jet& Jet::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (a.nv_ != b.nv_) throw std::invalid_argument("Jet: nvars mismatch");
  const Basis& bs = basis(a.nv_);
  Jet r(a.nv_);
  for (const auto& [ia, ib, iout] : bs.mul) {
    r.c_[static_cast<std::size_t>(iout)] +=
        a.c_[static_cast<std::size_t>(ia)] * b.c_[static_cast<std::size_t>(ib)];
  }
  return r;
}

Jet Jet::compose(const std::array<double, kMaxDeg + 1>& f) const {
  // w = this - value; result = sum_k f[k]/k! * w^k via Horner.
  Jet w = *this;
  w.c_[0] = 0.0;
  std::array<double, kMaxDeg + 1> coef{};
  double kfact = 1.0;
  for (int k = 0; k <= kMaxDeg; ++k) {
    if (k > 0) kfact *= k;
    coef[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k)] / kfact;
  }
  Jet acc = Jet::constant(nv_, coef[kMaxDeg]);
  for (int k = kMaxDeg - 1; k >= 0; --k) {
    acc = acc * w;
    acc += coef[static_cast<std::size_t>(k)];
  }
  return acc;
}

Jet Jet::reciprocal() const {
  const double u = value();
  if (u == 0.0) throw std::invalid_argument("Jet: reciprocal of zero");
  const double iu = 1.0 / u;
  return compose({iu, -iu * iu, 2.0 * iu * iu * iu, -6.0 * iu * iu * iu * iu,
                  24.0 * iu * iu * iu * iu * iu});
}

Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }

Jet operator/(double a, const Jet& b) {
  Jet r = b.reciprocal();
  return r *= a;
}

Jet exp(const Jet& x) {
  const double e = std::exp(x.value());
  return x.compose({e, e, e, e, e});
}

Jet log(const Jet& x) {
  const double u = x.value();
  if (u <= 0.0) throw std::invalid_argument("Jet: log of non-positive value");
  const double iu = 1.0 / u;
  return x.compose({std::log(u), iu, -iu * iu, 2.0 * iu * iu * iu,
                    -6.0 * iu * iu * iu * iu});
}

Jet sqrt(const Jet& x) { return pow(x, 0.5); }

Jet pow(const Jet& x, double p) {
  const double u = x.value();
  if (u <= 0.0) throw std::invalid_argument("Jet: pow of non-positive base");
  std::array<double, Jet::kMaxDeg + 1> f{};
  double coef = std::pow(u, p);
  double q = p;
  f[0] = coef;
  for (int k = 1; k <= Jet::kMaxDeg; ++k) {
    coef *= q / u;
    f[static_cast<std::size_t>(k)] = coef;
    q -= 1.0;
  }
  return x.compose(f);
}

Jet implicit_root(const std::function<Jet(const Jet&, std::span<const Jet>)>& g,
                  std::span<const Jet> args, double w0) {
  if (args.empty()) throw std::invalid_argument("implicit_root: no arguments");
  const int nv = args[0].nvars();
  Jet w = Jet::constant(nv, w0);
  // Each Newton step doubles the number of correct Taylor orders; five steps
  // are enough for degree 4 from an exact scalar root.
  for (int it = 0; it < 8; ++it) {
    const Jet gv = g(w, args);
    // Quasi-Newton with a scalar secant slope. The fixed point solves
    // g(w) = 0 in full Jet arithmetic, so the slope approximation only
    // affects the convergence rate, not the limit.
    const double h = 1e-7 * (std::abs(w.value()) + 1.0);
    const Jet wh = w + Jet::constant(nv, h);
    const double gw = (g(wh, args).value() - gv.value()) / h;
    if (gw == 0.0) throw std::invalid_argument("implicit_root: dg/dw vanished");
    w -= gv * (1.0 / gw);
  }
  return w;
}

}  // namespace sra
