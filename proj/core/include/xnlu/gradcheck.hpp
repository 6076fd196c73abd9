#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "xnlu/autodiff.hpp"

namespace xnlu {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

/// Compares reverse-mode gradients of the scalar built by `loss` against
/// central differences of step `eps` over every entry of every parameter.
/// Parameter values are perturbed in place and restored.
GradCheckReport grad_check(const std::function<Var(Graph&)>& loss, std::span<Parameter* const> params,
                           double eps = 1e-5);

/// Same comparison for a plain function with a supplied analytic gradient.
double grad_check(const std::function<double(std::span<const double>)>& f, std::span<const double> analytic,
                  std::vector<double> theta, double eps = 1e-5);

}  // namespace xnlu
