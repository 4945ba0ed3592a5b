#pragma once

#include <functional>
#include <string>
#include <vector>

#include "palmseg/tensor.hpp"

namespace palmseg {

/// Max relative error between x's populated reverse-mode gradient and central
/// finite differences of `eval`, which must recompute the scalar objective
/// from the tensors' current contents. Relative error uses denominator
/// max(|analytic|, |numeric|, 1e-4), so near-zero gradients are compared
/// absolutely. 64-bit only; run backward first.
double grad_check(const std::function<double()>& eval, TensorT<double>& x,
                  double h);

struct GradCheckItem {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return max_rel_error < tolerance; }
};

/// Every differentiable op, the full context fusion block and a tiny
/// end-to-end network, each compared against finite differences. The
/// end-to-end item sweeps every parameter coordinate, so this takes seconds.
std::vector<GradCheckItem> gradcheck_suite(uint64_t seed);

}  // namespace palmseg
