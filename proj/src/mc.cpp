#include "sra/mc.hpp"

#include <atomic>
#include <cmath>
#include <memory>

#include "sra/errors.hpp"
#include "sra/parallel.hpp"

namespace sra {

namespace {

constexpr double kEps = 2.220446049250313e-16;

double step1(double x) { return std::cbrt(kEps) * std::max(1.0, std::abs(x)); }
double step2(double x) {
  return std::pow(kEps, 0.25) * std::max(1.0, std::abs(x));
}

// Deterministic chunked accumulation of per-replicate vectors: partial sums
// per fixed-size chunk, reduced in chunk order.
class ChunkAccumulator {
 public:
  ChunkAccumulator(std::uint64_t total, std::size_t width)
      : width_(width), chunks_((total + kChunk - 1) / kChunk),
        sums_(chunks_ * width, 0.0), sqs_(chunks_ * width, 0.0) {}

  static constexpr std::uint64_t kChunk = 256;

  void add(std::uint64_t rep, const double* vals) {
    const std::size_t c = static_cast<std::size_t>(rep / kChunk);
    double* s = sums_.data() + c * width_;
    double* q = sqs_.data() + c * width_;
    for (std::size_t i = 0; i < width_; ++i) {
      s[i] += vals[i];
      q[i] += vals[i] * vals[i];
    }
  }

  // mean and standard error of the mean, reduced in chunk-index order
  void finish(std::uint64_t total, std::vector<double>* mean,
              std::vector<double>* se) const {
    mean->assign(width_, 0.0);
    se->assign(width_, 0.0);
    for (std::size_t c = 0; c < chunks_; ++c) {
      for (std::size_t i = 0; i < width_; ++i) {
        (*mean)[i] += sums_[c * width_ + i];
        (*se)[i] += sqs_[c * width_ + i];
      }
    }
    const double n = static_cast<double>(total);
    for (std::size_t i = 0; i < width_; ++i) {
      (*mean)[i] /= n;
      const double var = std::max(0.0, (*se)[i] / n - (*mean)[i] * (*mean)[i]);
      (*se)[i] = std::sqrt(var / n);
    }
  }

 private:
  std::size_t width_;
  std::size_t chunks_;
  std::vector<double> sums_;
  std::vector<double> sqs_;
};

SymTensor tensor_from(const std::vector<double>& flat, int order, int dim,
                      std::vector<std::vector<int>> groups) {
  SymTensor t(order, dim, std::move(groups));
  t.data() = flat;
  return t;
}

}  // namespace

CumulantSet cumulants_mc(const Model& model, const Eigen::VectorXd& theta,
                         const McOptions& opts) {
  if (opts.reps < 1000) {
    throw ConfigError("cumulants_mc: reps must be >= 1000");
  }
  const int d = model.dim();
  const std::size_t dz = static_cast<std::size_t>(d);
  const std::uint64_t B = opts.reps;
  if (B * dz * dz > 250000000ULL) {
    throw ConfigError("cumulants_mc: reps x dim^2 too large");
  }

  CumulantSet cs = make_cumulant_set(d, opts.depth);
  cs.provenance = Provenance::monte_carlo;
  cs.mc.reps = B;
  cs.mc.seed = opts.seed;

  // ---- phase 1: scores, Hessians, and fixed-data FD of the Hessian ----
  std::vector<double> grads(B * dz);
  std::vector<double> hessians(B * dz * dz);
  ChunkAccumulator acc3(B, dz * dz * dz);
  std::unique_ptr<ChunkAccumulator> acc4;
  if (opts.depth >= 4) acc4 = std::make_unique<ChunkAccumulator>(B, dz * dz * dz * dz);
  std::atomic<bool> bad{false};

  parallel_chunks(B, opts.workers, [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> l3(dz * dz * dz);
    std::vector<double> l4;
    if (opts.depth >= 4) l4.resize(dz * dz * dz * dz);
    for (std::uint64_t b = lo; b < hi; ++b) {
      RngStream rng(substream_seed(opts.seed, b));
      const Dataset data = model.sample(theta, rng);
      const LoglikEval ev = model.loglik(theta, data);
      if (!ev.grad.allFinite() || !ev.hess.allFinite()) {
        bad = true;
        return;
      }
      for (int r = 0; r < d; ++r) grads[b * dz + r] = ev.grad(r);
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s)
          hessians[(b * dz + r) * dz + s] = ev.hess(r, s);

      // L_rst by central differences of the Hessian at fixed data
      for (int t = 0; t < d; ++t) {
        const double h = step1(theta(t));
        Eigen::VectorXd tp = theta, tm = theta;
        tp(t) += h;
        tm(t) -= h;
        const Eigen::MatrixXd hp = model.loglik(tp, data).hess;
        const Eigen::MatrixXd hm = model.loglik(tm, data).hess;
        for (int r = 0; r < d; ++r)
          for (int s = 0; s < d; ++s)
            l3[(static_cast<std::size_t>(r) * dz + s) * dz + t] =
                (hp(r, s) - hm(r, s)) / (2.0 * h);
      }
      acc3.add(b, l3.data());

      if (opts.depth >= 4) {
        const Eigen::MatrixXd h0 = ev.hess;
        for (int t = 0; t < d; ++t) {
          for (int u = t; u < d; ++u) {
            const double ht = step2(theta(t));
            const double hu = step2(theta(u));
            Eigen::MatrixXd dd;
            if (t == u) {
              Eigen::VectorXd tp = theta, tm = theta;
              tp(t) += ht;
              tm(t) -= ht;
              dd = (model.loglik(tp, data).hess - 2.0 * h0 +
                    model.loglik(tm, data).hess) /
                   (ht * ht);
            } else {
              Eigen::VectorXd tpp = theta, tpm = theta, tmp = theta, tmm = theta;
              tpp(t) += ht; tpp(u) += hu;
              tpm(t) += ht; tpm(u) -= hu;
              tmp(t) -= ht; tmp(u) += hu;
              tmm(t) -= ht; tmm(u) -= hu;
              dd = (model.loglik(tpp, data).hess - model.loglik(tpm, data).hess -
                    model.loglik(tmp, data).hess + model.loglik(tmm, data).hess) /
                   (4.0 * ht * hu);
            }
            for (int r = 0; r < d; ++r)
              for (int s = 0; s < d; ++s) {
                const double v = dd(r, s);
                l4[((static_cast<std::size_t>(r) * dz + s) * dz + t) * dz + u] = v;
                l4[((static_cast<std::size_t>(r) * dz + s) * dz + u) * dz + t] = v;
              }
          }
        }
        acc4->add(b, l4.data());
      }
    }
  });
  if (bad) throw NumericError("cumulants_mc: non-finite likelihood derivatives");

  std::vector<double> mean, se;
  acc3.finish(B, &mean, &se);
  cs.lam3 = tensor_from(mean, 3, d, {});
  cs.mc.se_lam3 = tensor_from(se, 3, d, {});
  if (opts.depth >= 4) {
    acc4->finish(B, &mean, &se);
    *cs.lam4 = tensor_from(mean, 4, d, {});
    cs.mc.se_lam4 = tensor_from(se, 4, d, {});
  }

  // ---- phase 2: moments of scores and Hessians (serial, replicate order) ---
  Eigen::VectorXd gbar = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd hbar = Eigen::MatrixXd::Zero(d, d);
  for (std::uint64_t b = 0; b < B; ++b) {
    for (int r = 0; r < d; ++r) gbar(r) += grads[b * dz + r];
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s) hbar(r, s) += hessians[(b * dz + r) * dz + s];
  }
  gbar /= static_cast<double>(B);
  hbar /= static_cast<double>(B);

  std::vector<double> s_l2(dz * dz, 0.0), q_l2(dz * dz, 0.0);
  std::vector<double> s_l11(dz * dz, 0.0), q_l11(dz * dz, 0.0);
  std::vector<double> s_l21(dz * dz * dz, 0.0), q_l21(dz * dz * dz, 0.0);
  std::vector<double> s_l111(dz * dz * dz, 0.0), q_l111(dz * dz * dz, 0.0);
  for (std::uint64_t b = 0; b < B; ++b) {
    for (int r = 0; r < d; ++r) {
      const double gr = grads[b * dz + r] - gbar(r);
      for (int s = 0; s < d; ++s) {
        const double h = hessians[(b * dz + r) * dz + s];
        const double hc = h - hbar(r, s);
        const double gs = grads[b * dz + s] - gbar(s);
        s_l2[static_cast<std::size_t>(r) * dz + s] += h;
        q_l2[static_cast<std::size_t>(r) * dz + s] += h * h;
        const double v11 = gr * gs;
        s_l11[static_cast<std::size_t>(r) * dz + s] += v11;
        q_l11[static_cast<std::size_t>(r) * dz + s] += v11 * v11;
        for (int t = 0; t < d; ++t) {
          const double gt = grads[b * dz + t] - gbar(t);
          const double v21 = hc * gt;
          s_l21[(static_cast<std::size_t>(r) * dz + s) * dz + t] += v21;
          q_l21[(static_cast<std::size_t>(r) * dz + s) * dz + t] += v21 * v21;
          const double v111 = gr * gs * gt;
          s_l111[(static_cast<std::size_t>(r) * dz + s) * dz + t] += v111;
          q_l111[(static_cast<std::size_t>(r) * dz + s) * dz + t] += v111 * v111;
        }
      }
    }
  }
  auto finish_flat = [&](std::vector<double>& s, std::vector<double>& q) {
    const double n = static_cast<double>(B);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] /= n;
      const double var = std::max(0.0, q[i] / n - s[i] * s[i]);
      q[i] = std::sqrt(var / n);
    }
  };
  finish_flat(s_l2, q_l2);
  finish_flat(s_l11, q_l11);
  finish_flat(s_l21, q_l21);
  finish_flat(s_l111, q_l111);
  cs.lam2 = tensor_from(s_l2, 2, d, {});
  cs.mc.se_lam2 = tensor_from(q_l2, 2, d, {});
  cs.lam11 = tensor_from(s_l11, 2, d, {});
  cs.mc.se_lam11 = tensor_from(q_l11, 2, d, {});
  cs.lam21 = tensor_from(s_l21, 3, d, {});
  cs.mc.se_lam21 = tensor_from(q_l21, 3, d, {});
  cs.lam111 = tensor_from(s_l111, 3, d, {});
  cs.mc.se_lam111 = tensor_from(q_l111, 3, d, {});

  // ---- theta-derivative arrays: difference whole re-runs, shared streams ---
  auto mean_hess_run = [&](const Eigen::VectorXd& th, ChunkAccumulator& acc) {
    std::atomic<bool> fail{false};
    parallel_chunks(B, opts.workers, [&](std::uint64_t lo, std::uint64_t hi) {
      std::vector<double> buf(dz * dz);
      for (std::uint64_t b = lo; b < hi; ++b) {
        RngStream rng(substream_seed(opts.seed, b));
        const Dataset data = model.sample(th, rng);
        const Eigen::MatrixXd h = model.loglik(th, data).hess;
        if (!h.allFinite()) {
          fail = true;
          return;
        }
        for (int r = 0; r < d; ++r)
          for (int s = 0; s < d; ++s) buf[static_cast<std::size_t>(r) * dz + s] = h(r, s);
        acc.add(b, buf.data());
      }
    });
    if (fail) throw NumericError("cumulants_mc: non-finite derivatives in FD re-run");
  };

  std::vector<double> dl2(dz * dz * dz, 0.0), dl2_se(dz * dz * dz, 0.0);
  for (int t = 0; t < d; ++t) {
    const double h = step1(theta(t));
    Eigen::VectorXd tp = theta, tm = theta;
    tp(t) += h;
    tm(t) -= h;
    ChunkAccumulator ap(B, dz * dz), am(B, dz * dz);
    mean_hess_run(tp, ap);
    mean_hess_run(tm, am);
    std::vector<double> mp, sp, mm, sm;
    ap.finish(B, &mp, &sp);
    am.finish(B, &mm, &sm);
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s) {
        const std::size_t rs = static_cast<std::size_t>(r) * dz + s;
        dl2[rs * dz + t] = (mp[rs] - mm[rs]) / (2.0 * h);
        // Correlated runs: this overstates the SE, which is conservative.
        dl2_se[rs * dz + t] =
            std::sqrt(sp[rs] * sp[rs] + sm[rs] * sm[rs]) / (2.0 * h);
      }
  }
  cs.dlam2 = tensor_from(dl2, 3, d, {});
  cs.mc.se_dlam2 = tensor_from(dl2_se, 3, d, {});

  if (opts.depth >= 4) {
    // dlam3: difference the lam3 estimator; ddlam2: second-difference lam2.
    auto mean_l3_run = [&](const Eigen::VectorXd& th, std::vector<double>* out) {
      ChunkAccumulator acc(B, dz * dz * dz);
      parallel_chunks(B, opts.workers, [&](std::uint64_t lo, std::uint64_t hi) {
        std::vector<double> l3(dz * dz * dz);
        for (std::uint64_t b = lo; b < hi; ++b) {
          RngStream rng(substream_seed(opts.seed, b));
          const Dataset data = model.sample(th, rng);
          for (int t = 0; t < d; ++t) {
            const double h = step1(th(t));
            Eigen::VectorXd tp = th, tm = th;
            tp(t) += h;
            tm(t) -= h;
            const Eigen::MatrixXd hp = model.loglik(tp, data).hess;
            const Eigen::MatrixXd hm = model.loglik(tm, data).hess;
            for (int r = 0; r < d; ++r)
              for (int s = 0; s < d; ++s)
                l3[(static_cast<std::size_t>(r) * dz + s) * dz + t] =
                    (hp(r, s) - hm(r, s)) / (2.0 * h);
          }
          acc.add(b, l3.data());
        }
      });
      std::vector<double> se;
      acc.finish(B, out, &se);
    };

    std::vector<double> dl3(dz * dz * dz * dz, 0.0);
    for (int u = 0; u < d; ++u) {
      const double h = step1(theta(u));
      Eigen::VectorXd tp = theta, tm = theta;
      tp(u) += h;
      tm(u) -= h;
      std::vector<double> lp, lm;
      mean_l3_run(tp, &lp);
      mean_l3_run(tm, &lm);
      for (std::size_t i = 0; i < lp.size(); ++i) {
        dl3[i * dz + u] = (lp[i] - lm[i]) / (2.0 * h);
      }
    }
    *cs.dlam3 = tensor_from(dl3, 4, d, {});

    std::vector<double> ddl2(dz * dz * dz * dz, 0.0);
    std::vector<double> m0, s0;
    {
      ChunkAccumulator a0c(B, dz * dz);
      mean_hess_run(theta, a0c);
      a0c.finish(B, &m0, &s0);
    }
    for (int t = 0; t < d; ++t) {
      for (int u = t; u < d; ++u) {
        const double ht = step2(theta(t));
        const double hu = step2(theta(u));
        std::vector<double> vals(dz * dz);
        if (t == u) {
          Eigen::VectorXd tp = theta, tm = theta;
          tp(t) += ht;
          tm(t) -= ht;
          ChunkAccumulator ap(B, dz * dz), am(B, dz * dz);
          mean_hess_run(tp, ap);
          mean_hess_run(tm, am);
          std::vector<double> mp, sp, mm, sm;
          ap.finish(B, &mp, &sp);
          am.finish(B, &mm, &sm);
          for (std::size_t i = 0; i < vals.size(); ++i) {
            vals[i] = (mp[i] - 2.0 * m0[i] + mm[i]) / (ht * ht);
          }
        } else {
          auto run = [&](double st, double su, std::vector<double>* out) {
            Eigen::VectorXd th = theta;
            th(t) += st;
            th(u) += su;
            ChunkAccumulator a(B, dz * dz);
            mean_hess_run(th, a);
            std::vector<double> se2;
            a.finish(B, out, &se2);
          };
          std::vector<double> mpp, mpm, mmp, mmm;
          run(ht, hu, &mpp);
          run(ht, -hu, &mpm);
          run(-ht, hu, &mmp);
          run(-ht, -hu, &mmm);
          for (std::size_t i = 0; i < vals.size(); ++i) {
            vals[i] = (mpp[i] - mpm[i] - mmp[i] + mmm[i]) / (4.0 * ht * hu);
          }
        }
        for (int r = 0; r < d; ++r)
          for (int s = 0; s < d; ++s) {
            const std::size_t rs = static_cast<std::size_t>(r) * dz + s;
            ddl2[(rs * dz + t) * dz + u] = vals[rs];
            ddl2[(rs * dz + u) * dz + t] = vals[rs];
          }
      }
    }
    *cs.ddlam2 = tensor_from(ddl2, 4, d, {});
  }

  return cs;
}

}  // namespace sra
