#include "sra/tensor.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <random>

namespace sra {

SymTensor::SymTensor(int order, int dim,
                     std::vector<std::vector<int>> symmetry_groups)
    : order_(order), dim_(dim), groups_(std::move(symmetry_groups)) {
  if (order < 1 || order > 4) {
    throw std::invalid_argument("SymTensor: order must be in 1..4");
  }
  if (dim < 1) {
    throw std::invalid_argument("SymTensor: dim must be >= 1");
  }
  std::vector<bool> seen(static_cast<std::size_t>(order), false);
  for (const auto& g : groups_) {
    for (int s : g) {
      if (s < 0 || s >= order || seen[static_cast<std::size_t>(s)]) {
        throw std::invalid_argument("SymTensor: bad symmetry group");
      }
      seen[static_cast<std::size_t>(s)] = true;
    }
  }
  std::size_t n = 1;
  for (int i = 0; i < order; ++i) n *= static_cast<std::size_t>(dim);
  data_.assign(n, 0.0);
}

SymTensor SymTensor::zeros(int order, int dim,
                           std::vector<std::vector<int>> symmetry_groups) {
  return SymTensor(order, dim, std::move(symmetry_groups));
}

std::size_t SymTensor::offset(std::span<const int> idx) const {
  std::size_t off = 0;
  for (int i = 0; i < order_; ++i) {
    off = off * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx[i]);
  }
  return off;
}

void SymTensor::distinct_images(std::span<const int> idx,
                                std::vector<std::size_t>& out) const {
  out.clear();
  std::array<int, 4> cur{};
  for (int i = 0; i < order_; ++i) cur[static_cast<std::size_t>(i)] = idx[i];

  // Enumerate permutations within each group by recursion over groups.
  std::vector<std::size_t> offs;
  std::vector<std::vector<int>> group_perms;
  auto rec = [&](auto&& self, std::size_t gi) -> void {
    if (gi == groups_.size()) {
      out.push_back(offset(std::span<const int>(cur.data(),
                                                static_cast<std::size_t>(order_))));
      return;
    }
    const auto& g = groups_[gi];
    std::vector<int> vals;
    vals.reserve(g.size());
    for (int s : g) vals.push_back(cur[static_cast<std::size_t>(s)]);
    std::sort(vals.begin(), vals.end());
    do {
      for (std::size_t k = 0; k < g.size(); ++k) {
        cur[static_cast<std::size_t>(g[k])] = vals[k];
      }
      self(self, gi + 1);
    } while (std::next_permutation(vals.begin(), vals.end()));
    for (std::size_t k = 0; k < g.size(); ++k) {
      cur[static_cast<std::size_t>(g[k])] = idx[g[k]];
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

void SymTensor::add_sym(std::span<const int> idx, double value) {
  if (groups_.empty()) {
    data_[offset(idx)] += value;
    return;
  }
  std::vector<std::size_t> offs;
  distinct_images(idx, offs);
  for (std::size_t o : offs) data_[o] += value;
}

void SymTensor::scale(double c) {
  for (double& v : data_) v *= c;
}

double SymTensor::max_symmetry_violation(std::uint64_t seed, int trials) const {
  if (groups_.empty()) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, dim_ - 1);
  double worst = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(order_));
  std::vector<std::size_t> offs;
  for (int t = 0; t < trials; ++t) {
    for (auto& v : idx) v = pick(rng);
    distinct_images(idx, offs);
    const double ref = data_[offs.front()];
    for (std::size_t o : offs) {
      worst = std::max(worst, std::abs(data_[o] - ref));
    }
  }
  return worst;
}

SymTensor SymTensor::fixed(int slot, int index) const {
  if (order_ == 1) {
    throw std::invalid_argument("SymTensor::fixed: cannot reduce order-1");
  }
  SymTensor out(order_ - 1, dim_);
  std::vector<int> src(static_cast<std::size_t>(order_));
  std::vector<int> dst(static_cast<std::size_t>(order_ - 1));
  const std::size_t total = out.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    for (int i = order_ - 2; i >= 0; --i) {
      dst[static_cast<std::size_t>(i)] = static_cast<int>(rem % dim_);
      rem /= static_cast<std::size_t>(dim_);
    }
    int k = 0;
    for (int i = 0; i < order_; ++i) {
      src[static_cast<std::size_t>(i)] =
          (i == slot) ? index : dst[static_cast<std::size_t>(k++)];
    }
    out.data()[flat] = data_[offset(src)];
  }
  return out;
}

namespace {

struct ParsedSpec {
  std::vector<std::string> inputs;
  std::string output;
};

ParsedSpec parse_spec(const std::string& spec) {
  ParsedSpec p;
  const auto arrow = spec.find("->");
  if (arrow == std::string::npos) {
    throw std::invalid_argument("einsum: spec must contain '->'");
  }
  std::string lhs = spec.substr(0, arrow);
  p.output = spec.substr(arrow + 2);
  std::string cur;
  for (char c : lhs) {
    if (c == ',') {
      p.inputs.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  p.inputs.push_back(cur);
  return p;
}

}  // namespace

SymTensor einsum(const std::string& spec,
                 const std::vector<const SymTensor*>& operands) {
  const ParsedSpec p = parse_spec(spec);
  if (p.inputs.size() != operands.size()) {
    throw std::invalid_argument("einsum: operand count does not match spec");
  }

  std::map<char, int> label_dim;
  std::map<char, int> label_count;
  for (std::size_t t = 0; t < operands.size(); ++t) {
    const auto& labels = p.inputs[t];
    if (static_cast<int>(labels.size()) != operands[t]->order()) {
      throw std::invalid_argument("einsum: label count mismatch for operand " +
                                  std::to_string(t));
    }
    std::string sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument(
          "einsum: repeated label within one operand is rejected");
    }
    for (char c : labels) {
      const int d = operands[t]->dim();
      auto it = label_dim.find(c);
      if (it == label_dim.end()) {
        label_dim[c] = d;
      } else if (it->second != d) {
        throw std::invalid_argument(std::string("einsum: dimension mismatch ") +
                                    "for label '" + c + "'");
      }
      label_count[c] += 1;
    }
  }
  for (char c : p.output) {
    if (label_dim.find(c) == label_dim.end()) {
      throw std::invalid_argument(std::string("einsum: output label '") + c +
                                  "' absent from inputs");
    }
  }
  std::string sorted_out = p.output;
  std::sort(sorted_out.begin(), sorted_out.end());
  if (std::adjacent_find(sorted_out.begin(), sorted_out.end()) !=
      sorted_out.end()) {
    throw std::invalid_argument("einsum: repeated output label");
  }

  std::vector<char> summed;
  for (const auto& [c, cnt] : label_count) {
    const bool exported = p.output.find(c) != std::string::npos;
    if (exported) {
      if (cnt != 1) {
        throw std::invalid_argument(
            std::string("einsum: label '") + c +
            "' is both contracted and exported");
      }
    } else {
      if (cnt != 2) {
        throw std::invalid_argument(
            std::string("einsum: contracted label '") + c +
            "' must appear exactly twice (once up, once down)");
      }
      summed.push_back(c);
    }
  }

  std::map<char, int> assign;
  const int out_order = static_cast<int>(p.output.size());
  SymTensor result(std::max(out_order, 1),
                   out_order > 0 ? label_dim[p.output[0]] : 1);
  if (out_order > 1) {
    for (char c : p.output) {
      if (label_dim[c] != result.dim()) {
        throw std::invalid_argument("einsum: output labels of unequal dim");
      }
    }
  }

  std::vector<int> idx_buf;
  auto term_value = [&]() {
    double prod = 1.0;
    for (std::size_t t = 0; t < operands.size(); ++t) {
      idx_buf.clear();
      for (char c : p.inputs[t]) idx_buf.push_back(assign[c]);
      prod *= operands[t]->get(idx_buf);
    }
    return prod;
  };

  auto sum_over = [&](auto&& self, std::size_t k) -> double {
    if (k == summed.size()) return term_value();
    double acc = 0.0;
    const char c = summed[k];
    for (int v = 0; v < label_dim[c]; ++v) {
      assign[c] = v;
      acc += self(self, k + 1);
    }
    return acc;
  };

  if (out_order == 0) {
    result.data()[0] = sum_over(sum_over, 0);
    return result;
  }

  std::vector<int> out_idx(static_cast<std::size_t>(out_order));
  auto loop_out = [&](auto&& self, int slot) -> void {
    if (slot == out_order) {
      result.add_entry(out_idx, sum_over(sum_over, 0));
      return;
    }
    const char c = p.output[static_cast<std::size_t>(slot)];
    for (int v = 0; v < label_dim[c]; ++v) {
      assign[c] = v;
      out_idx[static_cast<std::size_t>(slot)] = v;
      self(self, slot + 1);
    }
  };
  loop_out(loop_out, 0);
  return result;
}

double einsum_scalar(const std::string& spec,
                     const std::vector<const SymTensor*>& operands) {
  const SymTensor r = einsum(spec, operands);
  if (spec.substr(spec.find("->") + 2).empty() == false) {
    throw std::invalid_argument("einsum_scalar: spec has free indices");
  }
  return r.data()[0];
}

}  // namespace sra
