#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sra/tensor.hpp"

namespace sra {

enum class Provenance { analytic, monte_carlo };

std::string to_string(Provenance p);

struct McMeta {
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  // Elementwise standard errors of the estimators, matching the array shapes.
  std::optional<SymTensor> se_lam2, se_lam11, se_lam3, se_lam21, se_lam111,
      se_dlam2, se_lam4, se_dlam3, se_ddlam2;
};

/// Expected log-likelihood derivative arrays at one parameter point.
///
/// Slot conventions:
///   lam2   [r,s]        E{L_rs},                symmetric
///   lam11  [r,s]        E{l_r l_s},             symmetric
///   lam3   [r,s,t]      E{L_rst},               symmetric
///   lam21  [r,s | t]    E{l_rs l_t},            symmetric in (r,s)
///   lam111 [r,s,t]      E{l_r l_s l_t},         symmetric
///   dlam2  [r,s | t]    d lam2[r,s] / d theta_t
///   lam4   [r,s,t,u]    E{L_rstu},              symmetric
///   dlam3  [r,s,t | u]  d lam3[r,s,t] / d theta_u
///   ddlam2 [r,s | t,u]  d^2 lam2[r,s] / d theta_t d theta_u
///
/// The fourth-order block (lam4, dlam3, ddlam2) is present only when the set
/// was built at depth 4; the Bartlett decomposition requires it.
struct CumulantSet {
  int dim = 0;
  SymTensor lam2, lam11, lam3, lam21, lam111, dlam2;
  std::optional<SymTensor> lam4, dlam3, ddlam2;
  Provenance provenance = Provenance::analytic;
  McMeta mc;

  int depth() const { return lam4.has_value() ? 4 : 3; }
  bool has_fourth_order() const {
    return lam4.has_value() && dlam3.has_value() && ddlam2.has_value();
  }
};

CumulantSet make_cumulant_set(int dim, int depth);

/// Max-abs residuals of the structural identities, with the natural O(n)
/// scale of the participating arrays for relative comparison.
struct IdentityResiduals {
  double first_bartlett = 0.0;    // lam2 + lam11
  double second_bartlett = 0.0;   // lam3 + 3 sym lam21 + lam111
  double dlam2_consistency = 0.0; // dlam2 - lam3 - lam21
  double scale = 1.0;
};

IdentityResiduals identity_residuals(const CumulantSet& cs);

}  // namespace sra
