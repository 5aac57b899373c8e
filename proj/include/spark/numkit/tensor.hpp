#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spark::numkit {

using RealVec = std::vector<double>;

// Row-major dense matrix.
struct RealMat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  RealMat() = default;
  RealMat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct ComplexVec {
  std::vector<double> re;
  std::vector<double> im;

  ComplexVec() = default;
  explicit ComplexVec(std::size_t n) : re(n, 0.0), im(n, 0.0) {}
  ComplexVec(std::vector<double> r, std::vector<double> i) : re(std::move(r)), im(std::move(i)) {}

  std::size_t size() const { return re.size(); }
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> a);
bool all_finite(std::span<const double> a);

}  // namespace spark::numkit
