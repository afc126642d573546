#pragma once

#include "sra/cumulants.hpp"
#include "sra/model.hpp"

namespace sra {

struct McOptions {
  std::uint64_t reps = 100000;
  std::uint64_t seed = 1;
  int depth = 3;
  int workers = 1;
};

/// Simulation estimate of the cumulant arrays at theta. Second-order arrays
/// average exact log-likelihood derivatives; L_rst and L_rstu per dataset come
/// from central differences of the analytic Hessian in theta. The
/// theta-derivative arrays (dlam2, dlam3, ddlam2) difference the whole MC
/// estimator across perturbed theta re-runs sharing replicate random streams.
/// Elementwise standard errors are reported in mc meta.
CumulantSet cumulants_mc(const Model& model, const Eigen::VectorXd& theta,
                         const McOptions& opts);

}  // namespace sra
