#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "rcsearch/random.hpp"
#include "rcsearch/tensor/params.hpp"

namespace rcs::tensor {

struct GradCheckOptions {
  double epsilon = 1e-6;
  // With steps > 1, central differences at epsilon, 10 epsilon, ... until
  // the rounding error bound (4 ulps of the loss over h) is below half the
  // tolerance (the last step otherwise).
  std::size_t steps = 1;
  double tolerance = 1e-4;
  // Coordinates sampled per parameter tensor (all when the tensor is smaller).
  std::size_t samples_per_parameter = 16;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;

  bool passed(double tolerance) const { return max_relative_error < tolerance; }
};

// |a - n| / max(1e-8, |a| + |n|)
double relative_error(double analytic, double numeric);

// Compares the gradients already accumulated in `store` (from one backward
// pass of `loss`) with central differences of `loss`. `loss` must be pure in
// the store's values. Parameter values are restored afterwards.
GradCheckReport finite_diff_check(const std::function<double()> &loss, ParameterStore &store,
                                  const GradCheckOptions &options);

}  // namespace rcs::tensor
