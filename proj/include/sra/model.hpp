#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "sra/cumulants.hpp"
#include "sra/rng.hpp"

#include "json.hpp"

namespace sra {

/// Complete-data sample laid out as a column-major real matrix. The shape is
/// model-specific: stratified models use n rows by q strata columns,
/// regression models a single column of length n.
struct Dataset {
  Eigen::MatrixXd y;
};

struct LoglikEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

enum class ParamScale { free, positive };

/// A statistical model structure (sample sizes, designs, constants). The
/// parameter theta = (psi, phi) with the scalar interest always at index 0 is
/// passed explicitly to every operation; instances are immutable and safe to
/// share across threads.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual const Eigen::VectorXd& theta0() const = 0;
  virtual std::vector<ParamScale> scales() const = 0;
  virtual int total_obs() const = 0;

  virtual bool in_domain(const Eigen::VectorXd& theta) const;

  virtual Dataset sample(const Eigen::VectorXd& theta, RngStream& rng) const = 0;
  virtual LoglikEval loglik(const Eigen::VectorXd& theta,
                            const Dataset& data) const = 0;
  virtual void validate_data(const Dataset& data) const;

  virtual bool has_analytic_cumulants() const { return true; }
  virtual CumulantSet cumulants(const Eigen::VectorXd& theta, int depth) const = 0;

  /// Optimizer warm start computed from the data (moment-style estimates).
  virtual Eigen::VectorXd init_guess(const Dataset& data) const = 0;
};

using ModelPtr = std::shared_ptr<const Model>;

/// Builds a registered model from a config document. Known names:
/// "normal-regression", "neyman-scott", "behrens-fisher", "exp-regression",
/// "inverse-gaussian", "multi-exp", "curved-normal".
ModelPtr build_model(const std::string& name, const nlohmann::json& config);
std::vector<std::string> registered_models();

}  // namespace sra
