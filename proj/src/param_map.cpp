#include "sra/param_map.hpp"

#include <cmath>
#include <stdexcept>

#include "sra/errors.hpp"

namespace sra {

namespace {

// Nested central differences with one Richardson level. Accuracy degrades
// with order; orders 3-4 exist only for the fallback path exercised in tests.
double fd_partial(const std::function<double(std::span<const double>)>& f,
                  std::vector<double>& x, std::span<const int> idxs) {
  if (idxs.empty()) return f(x);
  const int i = idxs[0];
  const auto rest = idxs.subspan(1);
  const double scale = std::max(1.0, std::abs(x[static_cast<std::size_t>(i)]));
  const double h0 =
      scale * std::pow(2.22e-16, 1.0 / (2.0 + 2.0 * static_cast<double>(idxs.size())));
  auto central = [&](double h) {
    const double save = x[static_cast<std::size_t>(i)];
    x[static_cast<std::size_t>(i)] = save + h;
    const double up = fd_partial(f, x, rest);
    x[static_cast<std::size_t>(i)] = save - h;
    const double dn = fd_partial(f, x, rest);
    x[static_cast<std::size_t>(i)] = save;
    return (up - dn) / (2.0 * h);
  };
  const double d1 = central(h0);
  const double d2 = central(h0 / 2.0);
  return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

MapComponent MapComponent::coordinate(int theta_index) {
  MapComponent c;
  c.kind_ = Kind::coordinate;
  c.coord_ = theta_index;
  c.support_ = {theta_index};
  return c;
}

MapComponent MapComponent::jet(std::vector<int> support,
                               std::function<Jet(std::span<const Jet>)> fn) {
  MapComponent c;
  c.kind_ = Kind::jet;
  c.support_ = std::move(support);
  c.jet_fn_ = std::move(fn);
  return c;
}

MapComponent MapComponent::finite_difference(
    std::vector<int> support,
    std::function<double(std::span<const double>)> fn) {
  MapComponent c;
  c.kind_ = Kind::finite_difference;
  c.support_ = std::move(support);
  c.fd_fn_ = std::move(fn);
  return c;
}

MapComponent MapComponent::custom(
    std::function<CompDerivs(const Eigen::VectorXd&, int)> fn) {
  MapComponent c;
  c.kind_ = Kind::custom;
  c.custom_fn_ = std::move(fn);
  return c;
}

double MapComponent::value(const Eigen::VectorXd& theta) const {
  switch (kind_) {
    case Kind::coordinate:
      return theta(coord_);
    case Kind::jet: {
      const int m = static_cast<int>(support_.size());
      std::vector<Jet> args;
      args.reserve(support_.size());
      for (int p = 0; p < m; ++p) {
        args.push_back(Jet::variable(m, p, theta(support_[static_cast<std::size_t>(p)])));
      }
      return jet_fn_(args).value();
    }
    case Kind::finite_difference: {
      std::vector<double> x(support_.size());
      for (std::size_t p = 0; p < support_.size(); ++p) x[p] = theta(support_[p]);
      return fd_fn_(x);
    }
    case Kind::custom:
      return custom_fn_(theta, 1).value;
  }
  throw std::logic_error("MapComponent::value: bad kind");
}

CompDerivs MapComponent::derivs(const Eigen::VectorXd& theta, int order) const {
  CompDerivs out;
  if (kind_ == Kind::custom) {
    out = custom_fn_(theta, order);
    return out;
  }
  out.support = support_;
  const int m = static_cast<int>(support_.size());
  const std::size_t mz = static_cast<std::size_t>(m);
  out.d1.assign(mz, 0.0);
  out.d2.assign(mz * mz, 0.0);
  if (order >= 3) out.d3.assign(mz * mz * mz, 0.0);
  if (order >= 4) out.d4.assign(mz * mz * mz * mz, 0.0);

  if (kind_ == Kind::coordinate) {
    out.value = theta(coord_);
    out.d1[0] = 1.0;
    return out;
  }

  if (kind_ == Kind::jet) {
    std::vector<Jet> args;
    args.reserve(mz);
    for (int p = 0; p < m; ++p) {
      args.push_back(Jet::variable(m, p, theta(support_[static_cast<std::size_t>(p)])));
    }
    const Jet r = jet_fn_(args);
    out.value = r.value();
    std::vector<int> e(mz, 0);
    auto bump = [&](int p, int delta) { e[static_cast<std::size_t>(p)] += delta; };
    for (int p = 0; p < m; ++p) {
      bump(p, 1);
      out.d1[static_cast<std::size_t>(p)] = r.partial(e);
      bump(p, -1);
    }
    for (int p = 0; p < m; ++p) {
      for (int q = 0; q < m; ++q) {
        bump(p, 1);
        bump(q, 1);
        out.d2[static_cast<std::size_t>(p) * mz + q] = r.partial(e);
        bump(p, -1);
        bump(q, -1);
      }
    }
    if (order >= 3) {
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
          for (int s = 0; s < m; ++s) {
            bump(p, 1);
            bump(q, 1);
            bump(s, 1);
            out.d3[(static_cast<std::size_t>(p) * mz + q) * mz + s] = r.partial(e);
            bump(p, -1);
            bump(q, -1);
            bump(s, -1);
          }
    }
    if (order >= 4) {
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q)
          for (int s = 0; s < m; ++s)
            for (int t = 0; t < m; ++t) {
              bump(p, 1);
              bump(q, 1);
              bump(s, 1);
              bump(t, 1);
              out.d4[((static_cast<std::size_t>(p) * mz + q) * mz + s) * mz + t] =
                  r.partial(e);
              bump(p, -1);
              bump(q, -1);
              bump(s, -1);
              bump(t, -1);
            }
    }
    return out;
  }

  // finite-difference fallback
  std::vector<double> x(mz);
  for (std::size_t p = 0; p < mz; ++p) x[p] = theta(support_[p]);
  out.value = fd_fn_(x);
  for (int p = 0; p < m; ++p) {
    const int ids[] = {p};
    out.d1[static_cast<std::size_t>(p)] = fd_partial(fd_fn_, x, ids);
  }
  for (int p = 0; p < m; ++p)
    for (int q = p; q < m; ++q) {
      const int ids[] = {p, q};
      const double v = fd_partial(fd_fn_, x, ids);
      out.d2[static_cast<std::size_t>(p) * mz + q] = v;
      out.d2[static_cast<std::size_t>(q) * mz + p] = v;
    }
  if (order >= 3) {
    for (int p = 0; p < m; ++p)
      for (int q = p; q < m; ++q)
        for (int s = q; s < m; ++s) {
          const int ids[] = {p, q, s};
          const double v = fd_partial(fd_fn_, x, ids);
          const int perm[6][3] = {{p, q, s}, {p, s, q}, {q, p, s},
                                  {q, s, p}, {s, p, q}, {s, q, p}};
          for (const auto& pr : perm) {
            out.d3[(static_cast<std::size_t>(pr[0]) * mz + pr[1]) * mz + pr[2]] = v;
          }
        }
  }
  if (order >= 4) {
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        for (int s = 0; s < m; ++s)
          for (int t = 0; t < m; ++t) {
            std::array<int, 4> ids{p, q, s, t};
            std::sort(ids.begin(), ids.end());
            const int srt[] = {ids[0], ids[1], ids[2], ids[3]};
            out.d4[((static_cast<std::size_t>(p) * mz + q) * mz + s) * mz + t] =
                fd_partial(fd_fn_, x, srt);
          }
  }
  return out;
}

Eigen::VectorXd ParamMap::value(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g(dim_out());
  for (int i = 0; i < dim_out(); ++i) g(i) = comps_[static_cast<std::size_t>(i)].value(theta);
  return g;
}

MapDerivs ParamMap::derivs(const Eigen::VectorXd& theta, int order) const {
  MapDerivs md;
  md.dim_in = dim_in_;
  md.order = order;
  md.comps.reserve(comps_.size());
  for (const auto& c : comps_) md.comps.push_back(c.derivs(theta, order));
  return md;
}

ParamMap ParamMap::identity(int dim) {
  std::vector<MapComponent> comps;
  comps.reserve(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) comps.push_back(MapComponent::coordinate(i));
  return ParamMap(dim, std::move(comps));
}

void chain_grad_hess(const MapDerivs& map, const Eigen::VectorXd& grad_base,
                     const Eigen::MatrixXd& hess_base, Eigen::VectorXd* grad_out,
                     Eigen::MatrixXd* hess_out) {
  const int d = map.dim_in;
  const int dg = static_cast<int>(map.comps.size());
  Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(dg, d);
  for (int i = 0; i < dg; ++i) {
    const auto& c = map.comps[static_cast<std::size_t>(i)];
    for (int p = 0; p < c.m(); ++p) a1(i, c.support[static_cast<std::size_t>(p)]) = c.a1(p);
  }
  if (grad_out) *grad_out = a1.transpose() * grad_base;
  if (hess_out) {
    *hess_out = a1.transpose() * hess_base * a1;
    for (int i = 0; i < dg; ++i) {
      const auto& c = map.comps[static_cast<std::size_t>(i)];
      for (int p = 0; p < c.m(); ++p) {
        for (int q = 0; q < c.m(); ++q) {
          (*hess_out)(c.support[static_cast<std::size_t>(p)],
                      c.support[static_cast<std::size_t>(q)]) +=
              grad_base(i) * c.a2(p, q);
        }
      }
    }
  }
}

namespace {

// Iterates the entries of a dense tensor, invoking fn on nonzeros only.
template <typename Fn>
void for_nonzeros2(const SymTensor& t, Fn&& fn) {
  const int d = t.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      const double v = t(i, j);
      if (v != 0.0) fn(i, j, v);
    }
}

template <typename Fn>
void for_nonzeros3(const SymTensor& t, Fn&& fn) {
  const int d = t.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const double v = t(i, j, k);
        if (v != 0.0) fn(i, j, k, v);
      }
}

template <typename Fn>
void for_nonzeros4(const SymTensor& t, Fn&& fn) {
  const int d = t.dim();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          const double v = t(i, j, k, l);
          if (v != 0.0) fn(i, j, k, l, v);
        }
}

inline void add3(SymTensor& t, int a, int b, int c, double v) {
  t.data()[(static_cast<std::size_t>(a) * t.dim() + b) * t.dim() + c] += v;
}

inline void add4(SymTensor& t, int a, int b, int c, int e, double v) {
  t.data()[((static_cast<std::size_t>(a) * t.dim() + b) * t.dim() + c) * t.dim() + e] += v;
}

}  // namespace

CumulantSet reparam_cumulants(const CumulantSet& base, const MapDerivs& map,
                              int depth) {
  const int d = map.dim_in;
  if (static_cast<int>(map.comps.size()) != base.dim) {
    throw std::invalid_argument("reparam_cumulants: map/base dimension mismatch");
  }
  if (depth >= 4 && (map.order < 4 || !base.has_fourth_order())) {
    throw NumericError(
        "reparam_cumulants: depth-4 transform needs order-4 map derivatives "
        "and fourth-order base arrays");
  }
  CumulantSet out = make_cumulant_set(d, depth);
  out.provenance = base.provenance;
  out.mc.reps = base.mc.reps;
  out.mc.seed = base.mc.seed;

  const auto& C = map.comps;
  auto sup = [&](int i, int p) {
    return C[static_cast<std::size_t>(i)].support[static_cast<std::size_t>(p)];
  };

  // lam2, lam11
  for_nonzeros2(base.lam2, [&](int i, int j, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        out.lam2.data()[static_cast<std::size_t>(sup(i, p)) * d + sup(j, q)] +=
            ci.a1(p) * cj.a1(q) * v;
  });
  for_nonzeros2(base.lam11, [&](int i, int j, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        out.lam11.data()[static_cast<std::size_t>(sup(i, p)) * d + sup(j, q)] +=
            ci.a1(p) * cj.a1(q) * v;
  });

  // lam3 = AAA lam3 + (A2 A1 over the three slot pairings) lam2
  for_nonzeros3(base.lam3, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < ck.m(); ++s)
          add3(out.lam3, sup(i, p), sup(j, q), sup(k, s),
               ci.a1(p) * cj.a1(q) * ck.a1(s) * v);
  });
  for_nonzeros2(base.lam2, [&](int i, int j, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u) {
          const double w = ci.a2(p, q) * cj.a1(u) * v;
          const int r = sup(i, p), s = sup(i, q), t = sup(j, u);
          add3(out.lam3, r, s, t, w);  // A^i_{rs} A^j_t
          add3(out.lam3, r, t, s, w);  // A^i_{rt} A^j_s
          add3(out.lam3, t, r, s, w);  // A^i_{st} A^j_r
        }
  });

  // lam21 = AAA lam21 + A2(rs) A1(t) lam11
  for_nonzeros3(base.lam21, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < ck.m(); ++s)
          add3(out.lam21, sup(i, p), sup(j, q), sup(k, s),
               ci.a1(p) * cj.a1(q) * ck.a1(s) * v);
  });
  for_nonzeros2(base.lam11, [&](int i, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < ck.m(); ++u)
          add3(out.lam21, sup(i, p), sup(i, q), sup(k, u),
               ci.a2(p, q) * ck.a1(u) * v);
  });

  // lam111 = AAA lam111
  for_nonzeros3(base.lam111, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < ck.m(); ++s)
          add3(out.lam111, sup(i, p), sup(j, q), sup(k, s),
               ci.a1(p) * cj.a1(q) * ck.a1(s) * v);
  });

  // dlam2[r,s|t] = (A2(rt)A1(s) + A1(r)A2(st)) lam2 + AAA dlam2
  for_nonzeros2(base.lam2, [&](int i, int j, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u) {
          // A^i_{rt} A^j_s : r = sup(i,p), t = sup(i,q), s = sup(j,u)
          add3(out.dlam2, sup(i, p), sup(j, u), sup(i, q),
               ci.a2(p, q) * cj.a1(u) * v);
        }
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int u = 0; u < cj.m(); ++u) {
          // A^i_r A^j_{st} : r = sup(i,p), s = sup(j,q), t = sup(j,u)
          add3(out.dlam2, sup(i, p), sup(j, q), sup(j, u),
               ci.a1(p) * cj.a2(q, u) * v);
        }
  });
  for_nonzeros3(base.dlam2, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < ck.m(); ++s)
          add3(out.dlam2, sup(i, p), sup(j, q), sup(k, s),
               ci.a1(p) * cj.a1(q) * ck.a1(s) * v);
  });

  if (depth < 4) return out;

  // ---- fourth-order block ----
  SymTensor& lam4 = *out.lam4;
  SymTensor& dlam3 = *out.dlam3;
  SymTensor& ddlam2 = *out.ddlam2;

  // lam4: AAAA lam4
  for_nonzeros4(*base.lam4, [&](int i, int j, int k, int l, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    const auto& cl = C[static_cast<std::size_t>(l)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < ck.m(); ++s)
          for (int t = 0; t < cl.m(); ++t)
            add4(lam4, sup(i, p), sup(j, q), sup(k, s), sup(l, t),
                 ci.a1(p) * cj.a1(q) * ck.a1(s) * cl.a1(t) * v);
  });
  // lam4: six A2 A1 A1 placements against lam3
  for_nonzeros3(base.lam3, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            const double x = ci.a2(p, q) * cj.a1(u) * ck.a1(w) * v;
            const int P = sup(i, p), Q = sup(i, q), U = sup(j, u), W = sup(k, w);
            add4(lam4, P, Q, U, W, x);  // (rs)
            add4(lam4, P, U, Q, W, x);  // (rt)
            add4(lam4, P, U, W, Q, x);  // (ru)
            add4(lam4, U, P, Q, W, x);  // (st)
            add4(lam4, U, P, W, Q, x);  // (su)
            add4(lam4, U, W, P, Q, x);  // (tu)
          }
  });
  // lam4: three A2 A2 placements and four A3 A1 placements against lam2
  for_nonzeros2(base.lam2, [&](int i, int j, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < cj.m(); ++w) {
            const double x = ci.a2(p, q) * cj.a2(u, w) * v;
            const int P = sup(i, p), Q = sup(i, q), U = sup(j, u), W = sup(j, w);
            add4(lam4, P, Q, U, W, x);  // (rs)(tu)
            add4(lam4, P, U, Q, W, x);  // (rt)(su)
            add4(lam4, P, U, W, Q, x);  // (ru)(st)
          }
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int s = 0; s < ci.m(); ++s)
          for (int w = 0; w < cj.m(); ++w) {
            const double x = ci.a3(p, q, s) * cj.a1(w) * v;
            const int P = sup(i, p), Q = sup(i, q), S = sup(i, s), W = sup(j, w);
            add4(lam4, P, Q, S, W, x);  // (rst)u
            add4(lam4, P, Q, W, S, x);  // (rsu)t
            add4(lam4, P, W, Q, S, x);  // (rtu)s
            add4(lam4, W, P, Q, S, x);  // (stu)r
          }
  });

  // dlam3[r,s,t|u]
  for_nonzeros3(base.lam3, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    // A2 on i: A^i_{ru} A^j_s A^k_t
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            add4(dlam3, sup(i, p), sup(j, u), sup(k, w), sup(i, q),
                 ci.a2(p, q) * cj.a1(u) * ck.a1(w) * v);
          }
    // A2 on j: A^i_r A^j_{su} A^k_t
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            add4(dlam3, sup(i, p), sup(j, q), sup(k, w), sup(j, u),
                 ci.a1(p) * cj.a2(q, u) * ck.a1(w) * v);
          }
    // A2 on k: A^i_r A^j_s A^k_{tu}
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int u = 0; u < ck.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            add4(dlam3, sup(i, p), sup(j, q), sup(k, u), sup(k, w),
                 ci.a1(p) * cj.a1(q) * ck.a2(u, w) * v);
          }
  });
  for_nonzeros4(*base.dlam3, [&](int i, int j, int k, int l, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    const auto& cl = C[static_cast<std::size_t>(l)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < ck.m(); ++s)
          for (int t = 0; t < cl.m(); ++t)
            add4(dlam3, sup(i, p), sup(j, q), sup(k, s), sup(l, t),
                 ci.a1(p) * cj.a1(q) * ck.a1(s) * cl.a1(t) * v);
  });
  for_nonzeros2(base.lam2, [&](int i, int j, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    // A3 A1 placements: {rsu}t, {rtu}s, {stu}r
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int s = 0; s < ci.m(); ++s)
          for (int w = 0; w < cj.m(); ++w) {
            const double x = ci.a3(p, q, s) * cj.a1(w) * v;
            const int P = sup(i, p), Q = sup(i, q), S = sup(i, s), W = sup(j, w);
            add4(dlam3, P, Q, W, S, x);  // {rsu}t
            add4(dlam3, P, W, Q, S, x);  // {rtu}s
            add4(dlam3, W, P, Q, S, x);  // {stu}r
          }
    // A2 A2 placements: {rs}{tu}, {rt}{su}, {st}{ru}
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < cj.m(); ++w) {
            const double x = ci.a2(p, q) * cj.a2(u, w) * v;
            const int P = sup(i, p), Q = sup(i, q), U = sup(j, u), W = sup(j, w);
            add4(dlam3, P, Q, U, W, x);  // {rs}{tu}
            add4(dlam3, P, U, Q, W, x);  // {rt}{su}
            add4(dlam3, U, P, Q, W, x);  // {st}{ru}
          }
  });
  for_nonzeros3(base.dlam2, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            const double x = ci.a2(p, q) * cj.a1(u) * ck.a1(w) * v;
            const int P = sup(i, p), Q = sup(i, q), U = sup(j, u), W = sup(k, w);
            add4(dlam3, P, Q, U, W, x);  // (rs)t
            add4(dlam3, P, U, Q, W, x);  // (rt)s
            add4(dlam3, U, P, Q, W, x);  // (st)r
          }
  });

  // ddlam2[r,t|s,u]
  for_nonzeros2(base.lam2, [&](int i, int j, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    // A^i_{rsu} A^j_t and A^i_r A^j_{tsu}
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int s = 0; s < ci.m(); ++s)
          for (int w = 0; w < cj.m(); ++w) {
            const double x = ci.a3(p, q, s) * cj.a1(w) * v;
            // r = P, s = Q, u = S, t = W
            add4(ddlam2, sup(i, p), sup(j, w), sup(i, q), sup(i, s), x);
          }
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < cj.m(); ++s)
          for (int w = 0; w < cj.m(); ++w) {
            const double x = ci.a1(p) * cj.a3(q, s, w) * v;
            // r = P, t = Q, s = S, u = W
            add4(ddlam2, sup(i, p), sup(j, q), sup(j, s), sup(j, w), x);
          }
    // A^i_{rs} A^j_{tu} and A^i_{ru} A^j_{ts}
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < cj.m(); ++w) {
            const double x = ci.a2(p, q) * cj.a2(u, w) * v;
            const int P = sup(i, p), Q = sup(i, q), U = sup(j, u), W = sup(j, w);
            add4(ddlam2, P, U, Q, W, x);  // A^i_{rs} A^j_{tu}
            add4(ddlam2, P, U, W, Q, x);  // A^i_{ru} A^j_{ts}
          }
  });
  for_nonzeros3(base.dlam2, [&](int i, int j, int k, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    // five A2 placements
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < ci.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            const double x = ci.a2(p, q) * cj.a1(u) * ck.a1(w) * v;
            const int P = sup(i, p), Q = sup(i, q), U = sup(j, u), W = sup(k, w);
            add4(ddlam2, P, U, Q, W, x);  // A^i_{rs} A^j_t A^k_u
            add4(ddlam2, P, U, W, Q, x);  // A^i_{ru} A^j_t A^k_s
          }
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int u = 0; u < cj.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            const double x = ci.a1(p) * cj.a2(q, u) * ck.a1(w) * v;
            const int P = sup(i, p), Q = sup(j, q), U = sup(j, u), W = sup(k, w);
            add4(ddlam2, P, Q, U, W, x);  // A^i_r A^j_{ts} A^k_u
            add4(ddlam2, P, Q, W, U, x);  // A^i_r A^j_{tu} A^k_s
          }
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int u = 0; u < ck.m(); ++u)
          for (int w = 0; w < ck.m(); ++w) {
            const double x = ci.a1(p) * cj.a1(q) * ck.a2(u, w) * v;
            // A^i_r A^j_t A^k_{su}
            add4(ddlam2, sup(i, p), sup(j, q), sup(k, u), sup(k, w), x);
          }
  });
  for_nonzeros4(*base.ddlam2, [&](int i, int j, int k, int l, double v) {
    const auto& ci = C[static_cast<std::size_t>(i)];
    const auto& cj = C[static_cast<std::size_t>(j)];
    const auto& ck = C[static_cast<std::size_t>(k)];
    const auto& cl = C[static_cast<std::size_t>(l)];
    for (int p = 0; p < ci.m(); ++p)
      for (int q = 0; q < cj.m(); ++q)
        for (int s = 0; s < ck.m(); ++s)
          for (int t = 0; t < cl.m(); ++t)
            add4(ddlam2, sup(i, p), sup(j, q), sup(k, s), sup(l, t),
                 ci.a1(p) * cj.a1(q) * ck.a1(s) * cl.a1(t) * v);
  });

  return out;
}

}  // namespace sra
