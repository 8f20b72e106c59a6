#ifndef SMAE_GRADCHECK_HPP
#define SMAE_GRADCHECK_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "smae/autodiff.hpp"

namespace smae {

// Central-difference verification of taped gradients. Runs the function once
// with gradients enabled, then twice per coordinate with plain values and
// compares. Relative error uses max(|analytic|, |numeric|, 1e-8) as the
// denominator. Instantiate with double: the tolerance contract (rel err
// < 1e-3) assumes a 64-bit oracle.

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t worst_input = 0;
  index_t worst_coord = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

namespace detail {

template <typename Scalar, typename F>
double eval_value(F& f, const std::vector<Tensor<Scalar>>& points) {
  Tape<Scalar> tape;
  std::vector<Var<Scalar>> leaves;
  leaves.reserve(points.size());
  for (const auto& p : points) leaves.push_back(tape.leaf(p, false));
  Var<Scalar> out = f(tape, leaves);
  if (out.value().size() != 1) {
    throw ContractError("check_gradient: function must return a scalar");
  }
  double v = static_cast<double>(out.value()[0]);
  if (!std::isfinite(v)) {
    throw NumericError("check_gradient: non-finite function value");
  }
  return v;
}

}  // namespace detail

// F: (Tape<Scalar>&, const std::vector<Var<Scalar>>&) -> Var<Scalar> (scalar)
template <typename Scalar, typename F>
GradCheckResult check_gradient_multi(F f, const std::vector<Tensor<Scalar>>& points,
                                     double step) {
  if (step <= 0) throw ParamError("check_gradient: step must be > 0");

  std::vector<Tensor<Scalar>> analytic;
  {
    Tape<Scalar> tape;
    std::vector<Var<Scalar>> leaves;
    leaves.reserve(points.size());
    for (const auto& p : points) leaves.push_back(tape.leaf(p, true));
    Var<Scalar> out = f(tape, leaves);
    if (out.value().size() != 1) {
      throw ContractError("check_gradient: function must return a scalar");
    }
    if (!std::isfinite(static_cast<double>(out.value()[0]))) {
      throw NumericError("check_gradient: non-finite function value");
    }
    tape.backward(out);
    analytic.reserve(leaves.size());
    for (const auto& l : leaves) {
      analytic.push_back(l.requires_grad() ? l.grad()
                                           : Tensor<Scalar>::zeros(l.value().dims()));
    }
  }

  GradCheckResult result;
  std::vector<Tensor<Scalar>> scratch = points;
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (index_t i = 0; i < points[k].size(); ++i) {
      const Scalar saved = scratch[k][i];
      scratch[k][i] = saved + static_cast<Scalar>(step);
      double fp = detail::eval_value(f, scratch);
      scratch[k][i] = saved - static_cast<Scalar>(step);
      double fm = detail::eval_value(f, scratch);
      scratch[k][i] = saved;

      double num = (fp - fm) / (2.0 * step);
      double ana = static_cast<double>(analytic[k][i]);
      double denom = std::max({std::fabs(ana), std::fabs(num), 1e-8});
      double rel = std::fabs(ana - num) / denom;
      if (rel > result.max_rel_err) {
        result.max_rel_err = rel;
        result.worst_input = k;
        result.worst_coord = i;
        result.analytic = ana;
        result.numeric = num;
      }
    }
  }
  return result;
}

// Single-input convenience; returns the worst relative error.
template <typename Scalar, typename F>
double check_gradient(F f, const Tensor<Scalar>& point, double step) {
  auto wrapped = [&f](Tape<Scalar>& tape, const std::vector<Var<Scalar>>& xs) {
    return f(tape, xs[0]);
  };
  return check_gradient_multi<Scalar>(wrapped, {point}, step).max_rel_err;
}

}  // namespace smae

#endif  // SMAE_GRADCHECK_HPP
