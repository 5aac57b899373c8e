#include "spark/kan/spline.hpp"

#include <algorithm>
#include <cmath>

#include "spark/error.hpp"

namespace spark::kan {
namespace {

constexpr int kMaxDegree = 7;

// Nonzero basis functions of degree p on knot interval `span_idx`
// (de Boor's triangular scheme). out[0..p] maps to indices span_idx-p..span_idx.
void basis_on_span(const std::vector<double>& t, std::size_t span_idx, int p, double x, double* out) {
  double left[kMaxDegree + 1];
  double right[kMaxDegree + 1];
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - t[span_idx + 1 - j];
    right[j] = t[span_idx + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    out[j] = saved;
  }
}

}  // namespace

SplineGrid make_spline_grid(int grid_size, int degree, double span) {
  require(grid_size >= 1, ErrorKind::kConfig, "spline grid_size must be >= 1");
  require(degree >= 1 && degree <= kMaxDegree, ErrorKind::kConfig, "spline degree must be in [1, 7]");
  require(span > 0.0, ErrorKind::kConfig, "spline span must be positive");
  SplineGrid grid;
  grid.degree = degree;
  grid.grid_size = grid_size;
  grid.span = span;
  const double h = 2.0 * span / grid_size;
  const int n_knots = grid_size + 2 * degree + 1;
  grid.knots.resize(static_cast<std::size_t>(n_knots));
  for (int i = 0; i < n_knots; ++i) grid.knots[static_cast<std::size_t>(i)] = -span + (i - degree) * h;
  // Exact endpoints so clamped inputs land on the boundary knots.
  grid.knots[static_cast<std::size_t>(degree)] = -span;
  grid.knots[static_cast<std::size_t>(degree + grid_size)] = span;
  return grid;
}

std::size_t bspline_local(double x, const SplineGrid& grid, double* values, double* derivs) {
  const int p = grid.degree;
  const auto& t = grid.knots;
  bool clamped = false;
  if (x < -grid.span) {
    x = -grid.span;
    clamped = true;
  } else if (x > grid.span) {
    x = grid.span;
    clamped = true;
  } else if (std::isnan(x)) {
    fail(ErrorKind::kNumeric, "bspline: NaN input");
  }
  const std::size_t first_interior = static_cast<std::size_t>(p);
  const std::size_t last_interior = static_cast<std::size_t>(p + grid.grid_size - 1);
  const double h = 2.0 * grid.span / grid.grid_size;
  auto span_idx = static_cast<std::size_t>(
      std::clamp(static_cast<long>(std::floor((x + grid.span) / h)) + p, static_cast<long>(first_interior),
                 static_cast<long>(last_interior)));
  // Floor can land one interval off near a knot.
  while (span_idx > first_interior && x < t[span_idx]) --span_idx;
  while (span_idx < last_interior && x >= t[span_idx + 1]) ++span_idx;

  basis_on_span(t, span_idx, p, x, values);
  if (derivs != nullptr) {
    if (clamped) {
      std::fill(derivs, derivs + p + 1, 0.0);
    } else {
      double lower[kMaxDegree + 1];
      basis_on_span(t, span_idx, p - 1, x, lower);
      // lower[r] is N_{span_idx-p+1+r, p-1}.
      for (int r = 0; r <= p; ++r) {
        const std::size_t k = span_idx - static_cast<std::size_t>(p) + static_cast<std::size_t>(r);
        double d = 0.0;
        if (r >= 1) d += p / (t[k + p] - t[k]) * lower[r - 1];
        if (r <= p - 1) d -= p / (t[k + p + 1] - t[k + 1]) * lower[r];
        derivs[r] = d;
      }
    }
  }
  return span_idx - static_cast<std::size_t>(p);
}

numkit::RealVec bspline_basis(double x, const SplineGrid& grid) {
  numkit::RealVec out(grid.n_basis(), 0.0);
  double local[kMaxDegree + 1];
  const std::size_t first = bspline_local(x, grid, local, nullptr);
  for (int r = 0; r <= grid.degree; ++r) out[first + static_cast<std::size_t>(r)] = local[r];
  return out;
}

}  // namespace spark::kan
