#pragma once

#include <cstddef>
#include <vector>

#include "spark/numkit/tensor.hpp"

namespace spark::kan {

// Uniform B-spline knot vector on [-span, span] with `grid_size` interior
// intervals, extended by `degree` knots on each side.
struct SplineGrid {
  int degree = 3;
  int grid_size = 5;
  double span = 1.5;
  std::vector<double> knots;

  std::size_t n_basis() const { return static_cast<std::size_t>(grid_size + degree); }
};

SplineGrid make_spline_grid(int grid_size = 5, int degree = 3, double span = 1.5);

// All n_basis basis values at x; x is clamped to [-span, span] first.
numkit::RealVec bspline_basis(double x, const SplineGrid& grid);

// The degree + 1 possibly nonzero basis values at x and their derivatives
// with respect to x, written to values/derivs. Returns the index of the
// first of those basis functions. Derivatives are zero when x was clamped.
std::size_t bspline_local(double x, const SplineGrid& grid, double* values, double* derivs);

}  // namespace spark::kan
