#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sra {

/// Dense real array over a small parameter index, order 1..4, with declared
/// slot-exchange symmetries. Values are stored fully (no packing); writes via
/// set_sym replicate the value across every permutation allowed by the
/// symmetry groups, so reads are plain strided lookups.
class SymTensor {
 public:
  SymTensor() = default;
  SymTensor(int order, int dim,
            std::vector<std::vector<int>> symmetry_groups = {});

  static SymTensor zeros(int order, int dim,
                         std::vector<std::vector<int>> symmetry_groups = {});

  int order() const { return order_; }
  int dim() const { return dim_; }
  const std::vector<std::vector<int>>& symmetry_groups() const {
    return groups_;
  }

  std::size_t size() const { return data_.size(); }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }
  double operator()(int i, int j) const {
    return data_[static_cast<std::size_t>(i) * dim_ + j];
  }
  double operator()(int i, int j, int k) const {
    return data_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }
  double operator()(int i, int j, int k, int l) const {
    return data_[((static_cast<std::size_t>(i) * dim_ + j) * dim_ + k) * dim_ +
                 l];
  }

  double get(std::span<const int> idx) const { return data_[offset(idx)]; }

  /// Adds `value` at `idx` and at every index obtained by permuting slots
  /// within each symmetry group (each distinct target written once).
  void add_sym(std::span<const int> idx, double value);
  void set_entry(std::span<const int> idx, double value) {
    data_[offset(idx)] = value;
  }
  void add_entry(std::span<const int> idx, double value) {
    data_[offset(idx)] += value;
  }

  void scale(double c);

  /// Largest |T[p(idx)] - T[idx]| over in-group permutations of random probes.
  double max_symmetry_violation(std::uint64_t seed = 1,
                                int trials = 200) const;

  /// Fixes one slot at a given index, returning an order-(k-1) tensor.
  SymTensor fixed(int slot, int index) const;

  std::size_t offset(std::span<const int> idx) const;

 private:
  void distinct_images(std::span<const int> idx,
                       std::vector<std::size_t>& out) const;

  int order_ = 0;
  int dim_ = 0;
  std::vector<std::vector<int>> groups_;
  std::vector<double> data_;
};

/// Einstein-summation contraction over explicitly labelled slots.
///
/// `spec` looks like "rs,st->rt" or "r,st,rst->". Each label is one character;
/// a label appearing in two input operands is summed over 0..dim-1 (one upper
/// and one lower occurrence in the usual convention), a label appearing in a
/// single operand must be exported to the output. Labels repeated within one
/// operand, appearing more than twice, or contracted while also exported are
/// rejected. Returns an order-0 result as a 1-element tensor when the output
/// side is empty; `einsum_scalar` unwraps it.
SymTensor einsum(const std::string& spec,
                 const std::vector<const SymTensor*>& operands);
double einsum_scalar(const std::string& spec,
                     const std::vector<const SymTensor*>& operands);

}  // namespace sra
