#include "rcsearch/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace rcs::tensor {

double relative_error(double analytic, double numeric) {
  return std::fabs(analytic - numeric) / std::max(1e-8, std::fabs(analytic) + std::fabs(numeric));
}

GradCheckReport finite_diff_check(const std::function<double()> &loss, ParameterStore &store,
                                  const GradCheckOptions &options) {
  GradCheckReport report;
  Rng rng(options.seed);
  const double base = options.steps > 1 ? loss() : 0.0;
  for (Parameter &p : store.all()) {
    std::vector<std::size_t> coords(p.value.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (coords.size() > options.samples_per_parameter) {
      rng.shuffle(coords);
      coords.resize(options.samples_per_parameter);
    }
    for (std::size_t idx : coords) {
      const double original = p.value[idx];
      auto central = [&](double h) {
        p.value[idx] = original + h;
        const double up = loss();
        p.value[idx] = original - h;
        const double down = loss();
        p.value[idx] = original;
        return (up - down) / (2.0 * h);
      };
      // Step ladder epsilon, 10 epsilon, ...: the smallest step whose
      // rounding error (a few ulps of the loss over h) stays well inside the
      // tolerance. Small steps rarely straddle a kink (leaky ReLU, abs);
      // gradients near the 1e-8 floor need larger ones.
      double numeric = 0.0;
      double h = options.epsilon;
      for (std::size_t i = 0; i < std::max<std::size_t>(options.steps, 1); ++i, h *= 10.0) {
        numeric = central(h);
        const double rounding = 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(base) / h;
        if (rounding <= 0.5 * options.tolerance * std::max(1e-8, 2.0 * std::fabs(numeric))) break;
      }
      const double analytic = p.grad[idx];
      const double err = relative_error(analytic, numeric);
      ++report.coordinates_checked;
      if (err > report.max_relative_error || report.worst_parameter.empty()) {
        report.max_relative_error = std::max(report.max_relative_error, err);
        report.worst_parameter = p.name;
        report.worst_index = idx;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace rcs::tensor
