#include "sra/model.hpp"

#include <cmath>

#include "sra/errors.hpp"
#include "sra/models.hpp"

namespace sra {

bool Model::in_domain(const Eigen::VectorXd& theta) const {
  if (theta.size() != dim()) return false;
  const auto sc = scales();
  for (int i = 0; i < dim(); ++i) {
    if (!std::isfinite(theta(i))) return false;
    if (sc[static_cast<std::size_t>(i)] == ParamScale::positive && theta(i) <= 0.0) {
      return false;
    }
  }
  return true;
}

void Model::validate_data(const Dataset& data) const {
  if (data.y.size() == 0) throw ConfigError(name() + ": empty dataset");
  if (!data.y.allFinite()) throw ConfigError(name() + ": non-finite data");
}

namespace {

using nlohmann::json;

double get_num(const json& cfg, const std::string& key, double dflt) {
  if (!cfg.contains(key)) return dflt;
  if (!cfg.at(key).is_number()) {
    throw ConfigError("config field '" + key + "' must be a number");
  }
  return cfg.at(key).get<double>();
}

int get_int(const json& cfg, const std::string& key, int dflt) {
  if (!cfg.contains(key)) return dflt;
  if (!cfg.at(key).is_number_integer()) {
    throw ConfigError("config field '" + key + "' must be an integer");
  }
  return cfg.at(key).get<int>();
}

Eigen::VectorXd get_vec(const json& cfg, const std::string& key, int len,
                        double dflt) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(len, dflt);
  if (!cfg.contains(key)) return v;
  const auto& node = cfg.at(key);
  if (node.is_number()) {
    v.setConstant(node.get<double>());
    return v;
  }
  if (!node.is_array() || static_cast<int>(node.size()) != len) {
    throw ConfigError("config field '" + key + "' must be a number or an array"
                      " of length " + std::to_string(len));
  }
  for (int i = 0; i < len; ++i) v(i) = node.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

Eigen::VectorXd centered_grid(int n) {
  Eigen::VectorXd z(n);
  if (n == 1) {
    z(0) = 0.0;
    return z;
  }
  for (int i = 0; i < n; ++i) {
    z(i) = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  z.array() -= z.mean();
  return z;
}

ModelPtr build_normal_regression(const json& cfg) {
  const int n = get_int(cfg, "n", 20);
  const int q = get_int(cfg, "q", 1);
  if (n <= q) throw ConfigError("normal-regression: need n > q");
  Eigen::MatrixXd X(n, q);
  if (cfg.contains("X")) {
    const auto& node = cfg.at("X");
    if (!node.is_array() || static_cast<int>(node.size()) != n) {
      throw ConfigError("normal-regression: X must be an n-row array");
    }
    for (int i = 0; i < n; ++i) {
      const auto& row = node.at(static_cast<std::size_t>(i));
      if (static_cast<int>(row.size()) != q) {
        throw ConfigError("normal-regression: X rows must have q entries");
      }
      for (int j = 0; j < q; ++j) X(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
    }
  } else {
    // Intercept plus polynomial contrasts of a centered grid, orthonormalized
    // so the information stays well conditioned at large q.
    const Eigen::VectorXd t = centered_grid(n);
    Eigen::MatrixXd V(n, q);
    V.col(0).setOnes();
    for (int j = 1; j < q; ++j) {
      V.col(j) = t.array().pow(static_cast<double>(j)).matrix();
    }
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, q) *
        std::sqrt(static_cast<double>(n));
  }
  return make_normal_regression(std::move(X), get_num(cfg, "sigma", 1.0),
                                get_vec(cfg, "beta", q, 0.0));
}

ModelPtr build_neyman_scott(const json& cfg) {
  const int n = get_int(cfg, "n", 10);
  const int q = get_int(cfg, "q", 2);
  return make_neyman_scott(n, q, get_num(cfg, "sigma", 1.0),
                           get_vec(cfg, "mu", q, 0.0));
}

ModelPtr build_behrens_fisher(const json& cfg) {
  const int n = get_int(cfg, "n", 10);
  const int q = get_int(cfg, "q", 2);
  return make_behrens_fisher(n, q, get_num(cfg, "mu", 0.0),
                             get_vec(cfg, "sigmas", q, 1.0));
}

ModelPtr build_exp_regression(const json& cfg) {
  const int n = get_int(cfg, "n", 20);
  const int ncov = get_int(cfg, "covariates", 2);
  if (ncov != 1 && ncov != 2) {
    throw ConfigError("exp-regression: covariates must be 1 or 2");
  }
  Eigen::VectorXd z = cfg.contains("z") ? get_vec(cfg, "z", n, 0.0)
                                        : centered_grid(n);
  Eigen::VectorXd w;
  if (ncov == 2) {
    if (cfg.contains("w")) {
      w = get_vec(cfg, "w", n, 0.0);
    } else {
      const Eigen::VectorXd t = centered_grid(n);
      w = t.array().square().matrix();
      w.array() -= w.mean();
    }
  }
  return make_exp_regression(std::move(z), std::move(w),
                             get_num(cfg, "psi", 1.0), get_num(cfg, "phi1", 1.0),
                             get_num(cfg, "phi2", 0.5));
}

ModelPtr build_inverse_gaussian(const json& cfg) {
  const int n = get_int(cfg, "n", 10);
  const int q = get_int(cfg, "q", 2);
  return make_inverse_gaussian(n, q, get_num(cfg, "psi", 1.0),
                               get_vec(cfg, "phi", q, 1.0));
}

ModelPtr build_multi_exp(const json& cfg) {
  const int n = get_int(cfg, "n", 10);
  const int q = get_int(cfg, "q", 2);
  if (q < 2) throw ConfigError("multi-exp: need q >= 2");
  return make_multi_exp(n, q, get_num(cfg, "t0", 0.5),
                        get_vec(cfg, "phi", q, 1.0));
}

ModelPtr build_curved_normal(const json& cfg) {
  const int n = get_int(cfg, "n", 10);
  const int q = get_int(cfg, "q", 1);
  return make_curved_normal(n, q, get_num(cfg, "psi", 1.0),
                            get_vec(cfg, "mu", q, 1.0));
}

}  // namespace

ModelPtr build_model(const std::string& name, const nlohmann::json& config) {
  if (!config.is_object() && !config.is_null()) {
    throw ConfigError("model config must be a JSON object");
  }
  const json cfg = config.is_null() ? json::object() : config;
  if (name == "normal-regression") return build_normal_regression(cfg);
  if (name == "neyman-scott") return build_neyman_scott(cfg);
  if (name == "behrens-fisher") return build_behrens_fisher(cfg);
  if (name == "exp-regression") return build_exp_regression(cfg);
  if (name == "inverse-gaussian") return build_inverse_gaussian(cfg);
  if (name == "multi-exp") return build_multi_exp(cfg);
  if (name == "curved-normal") return build_curved_normal(cfg);
  throw ConfigError("unknown model '" + name + "'");
}

std::vector<std::string> registered_models() {
  return {"normal-regression", "neyman-scott",     "behrens-fisher",
          "exp-regression",    "inverse-gaussian", "multi-exp",
          "curved-normal"};
}

}  // namespace sra
