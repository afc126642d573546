#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sra/cumulants.hpp"
#include "sra/jet.hpp"

namespace sra {

/// Derivatives of one base coordinate gamma^i with respect to the new
/// parameter theta, stored densely over the component's support (the theta
/// indices it actually depends on).
struct CompDerivs {
  std::vector<int> support;
  double value = 0.0;
  std::vector<double> d1;  // [m]
  std::vector<double> d2;  // [m*m]
  std::vector<double> d3;  // [m^3], order >= 3 only
  std::vector<double> d4;  // [m^4], order >= 4 only

  int m() const { return static_cast<int>(support.size()); }
  double a1(int p) const { return d1[static_cast<std::size_t>(p)]; }
  double a2(int p, int q) const {
    return d2[static_cast<std::size_t>(p) * support.size() + q];
  }
  double a3(int p, int q, int r) const {
    const std::size_t mm = support.size();
    return d3[(static_cast<std::size_t>(p) * mm + q) * mm + r];
  }
  double a4(int p, int q, int r, int s) const {
    const std::size_t mm = support.size();
    return d4[((static_cast<std::size_t>(p) * mm + q) * mm + r) * mm + s];
  }
};

struct MapDerivs {
  int dim_in = 0;
  int order = 0;
  std::vector<CompDerivs> comps;
};

/// One coordinate of a smooth map theta -> gamma. Components are either a
/// plain coordinate pick, a Jet-evaluated function of at most 6 theta entries
/// (exact derivatives), a finite-difference fallback for black-box scalars,
/// or a custom routine that fills CompDerivs itself.
class MapComponent {
 public:
  static MapComponent coordinate(int theta_index);
  static MapComponent jet(std::vector<int> support,
                          std::function<Jet(std::span<const Jet>)> fn);
  static MapComponent finite_difference(
      std::vector<int> support,
      std::function<double(std::span<const double>)> fn);
  static MapComponent custom(
      std::function<CompDerivs(const Eigen::VectorXd&, int)> fn);

  CompDerivs derivs(const Eigen::VectorXd& theta, int order) const;
  double value(const Eigen::VectorXd& theta) const;

 private:
  enum class Kind { coordinate, jet, finite_difference, custom };
  Kind kind_ = Kind::coordinate;
  int coord_ = -1;
  std::vector<int> support_;
  std::function<Jet(std::span<const Jet>)> jet_fn_;
  std::function<double(std::span<const double>)> fd_fn_;
  std::function<CompDerivs(const Eigen::VectorXd&, int)> custom_fn_;
};

class ParamMap {
 public:
  ParamMap() = default;
  ParamMap(int dim_in, std::vector<MapComponent> comps)
      : dim_in_(dim_in), comps_(std::move(comps)) {}

  int dim_in() const { return dim_in_; }
  int dim_out() const { return static_cast<int>(comps_.size()); }

  Eigen::VectorXd value(const Eigen::VectorXd& theta) const;
  MapDerivs derivs(const Eigen::VectorXd& theta, int order) const;

  static ParamMap identity(int dim);

 private:
  int dim_in_ = 0;
  std::vector<MapComponent> comps_;
};

/// Pushes a cumulant set through a smooth reparameterization theta -> gamma.
/// `base` holds the arrays at gamma = map(theta); the result holds the arrays
/// of the composed log-likelihood at theta. Depth 3 needs map derivatives to
/// order 2, depth 4 to order 4.
CumulantSet reparam_cumulants(const CumulantSet& base, const MapDerivs& map,
                              int depth);

/// Gradient/Hessian chain rule for the composed log-likelihood.
void chain_grad_hess(const MapDerivs& map, const Eigen::VectorXd& grad_base,
                     const Eigen::MatrixXd& hess_base, Eigen::VectorXd* grad_out,
                     Eigen::MatrixXd* hess_out);

}  // namespace sra
