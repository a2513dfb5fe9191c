#include "trajstyle/numkit/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "trajstyle/error.hpp"

namespace trajstyle::numkit {

double grad_check(const DifferentiableFunction& function, std::span<const double> point,
                  double step) {
  if (!(step > 0.0)) throw ValueError("grad_check: step must be > 0");
  const std::vector<double> analytic = function.gradient(point);
  if (analytic.size() != point.size()) throw ShapeError("grad_check: gradient size mismatch");

  std::vector<double> probe(point.begin(), point.end());
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    const double original = probe[i];
    probe[i] = original + step;
    const double plus = function.value(probe);
    probe[i] = original - step;
    const double minus = function.value(probe);
    probe[i] = original;
    if (!std::isfinite(plus) || !std::isfinite(minus) || !std::isfinite(analytic[i])) {
      throw NonFiniteError("grad_check: non-finite evaluation at coordinate " + std::to_string(i));
    }
    const double fd = (plus - minus) / (2.0 * step);
    const double scale = std::max({std::abs(analytic[i]), std::abs(fd), 1e-12});
    worst = std::max(worst, std::abs(analytic[i] - fd) / scale);
  }
  return worst;
}

}  // namespace trajstyle::numkit
