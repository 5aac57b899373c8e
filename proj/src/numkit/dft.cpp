#include "spark/numkit/dft.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "spark/error.hpp"

namespace spark::numkit {
namespace {

using cx = std::complex<double>;

// Prime factors above this size are handled by Bluestein instead of an
// O(p^2) butterfly.
constexpr std::size_t kMaxDirectRadix = 32;

std::vector<std::size_t> factorize(std::size_t n) {
  std::vector<std::size_t> factors;
  // Radix 4 first keeps the recursion shallow for power-of-two lengths.
  while (n % 4 == 0) {
    factors.push_back(4);
    n /= 4;
  }
  for (std::size_t p = 2; p * p <= n; ++p) {
    while (n % p == 0) {
      factors.push_back(p);
      n /= p;
    }
  }
  if (n > 1) factors.push_back(n);
  return factors;
}

class Plan {
 public:
  explicit Plan(std::size_t n) : n_(n), factors_(factorize(n)) {
    twiddle_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      twiddle_[j] = cx(std::cos(angle), std::sin(angle));
    }
    std::size_t largest = 1;
    for (auto f : factors_) largest = std::max(largest, f);
    if (largest > kMaxDirectRadix) init_bluestein();
  }

  void execute(std::span<cx> data, bool inverse) const {
    if (n_ <= 1) return;
    if (inverse) {
      for (auto& v : data) v = std::conj(v);
    }
    if (chirp_.empty()) {
      std::vector<cx> in(data.begin(), data.end());
      std::vector<cx> scratch(n_);
      recurse(in.data(), 1, data.data(), n_, 0, scratch);
    } else {
      bluestein(data);
    }
    if (inverse) {
      for (auto& v : data) v = std::conj(v);
    }
  }

 private:
  // Decimation in time: out[0..n) = DFT of in[0], in[stride], ... (n terms).
  void recurse(const cx* in, std::size_t stride, cx* out, std::size_t n, std::size_t level,
               std::vector<cx>& scratch) const {
    if (n == 1) {
      out[0] = in[0];
      return;
    }
    const std::size_t p = factors_[level];
    const std::size_t m = n / p;
    for (std::size_t q = 0; q < p; ++q) {
      recurse(in + q * stride, stride * p, out + q * m, m, level + 1, scratch);
    }
    const std::size_t step = n_ / n;  // twiddle_[step * j] = exp(-2 pi i j / n)
    cx* tmp = scratch.data();
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t q = 0; q < p; ++q) {
        tmp[q] = out[q * m + k] * twiddle_[(step * q * k) % n_];
      }
      if (p == 2) {
        out[k] = tmp[0] + tmp[1];
        out[k + m] = tmp[0] - tmp[1];
      } else if (p == 4) {
        const cx a = tmp[0] + tmp[2];
        const cx b = tmp[0] - tmp[2];
        const cx c = tmp[1] + tmp[3];
        const cx d = (tmp[1] - tmp[3]) * cx(0.0, -1.0);
        out[k] = a + c;
        out[k + m] = b + d;
        out[k + 2 * m] = a - c;
        out[k + 3 * m] = b - d;
      } else {
        const std::size_t p_step = n_ / p;
        for (std::size_t r = 0; r < p; ++r) {
          cx acc = 0.0;
          for (std::size_t q = 0; q < p; ++q) {
            acc += tmp[q] * twiddle_[(p_step * ((q * r) % p)) % n_];
          }
          out[k + r * m] = acc;
        }
      }
    }
  }

  void init_bluestein() {
    std::size_t m = 1;
    while (m < 2 * n_ - 1) m <<= 1;
    sub_ = std::make_unique<Plan>(m);
    chirp_.resize(n_);
    const std::size_t two_n = 2 * n_;
    for (std::size_t j = 0; j < n_; ++j) {
      // j^2 mod 2n keeps the angle small for large j.
      const std::size_t jj = (j * j) % two_n;
      const double angle = -std::numbers::pi * static_cast<double>(jj) / static_cast<double>(n_);
      chirp_[j] = cx(std::cos(angle), std::sin(angle));
    }
    kernel_.assign(m, cx(0.0));
    kernel_[0] = std::conj(chirp_[0]);
    for (std::size_t j = 1; j < n_; ++j) {
      kernel_[j] = std::conj(chirp_[j]);
      kernel_[m - j] = std::conj(chirp_[j]);
    }
    sub_->execute(kernel_, false);
  }

  void bluestein(std::span<cx> data) const {
    const std::size_t m = kernel_.size();
    std::vector<cx> a(m, cx(0.0));
    for (std::size_t j = 0; j < n_; ++j) a[j] = data[j] * chirp_[j];
    sub_->execute(a, false);
    for (std::size_t j = 0; j < m; ++j) a[j] *= kernel_[j];
    sub_->execute(a, true);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n_; ++k) data[k] = a[k] * inv_m * chirp_[k];
  }

  std::size_t n_;
  std::vector<std::size_t> factors_;
  std::vector<cx> twiddle_;
  std::vector<cx> chirp_;
  std::vector<cx> kernel_;
  std::unique_ptr<Plan> sub_;
};

const Plan& plan_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<Plan>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plan>(n);
  return *slot;
}

ComplexVec transform(const ComplexVec& x, bool inverse) {
  require(x.re.size() == x.im.size(), ErrorKind::kInvalidInput, "dft: re/im length mismatch");
  const std::size_t n = x.size();
  if (!(n >= 4)) fail(ErrorKind::kInvalidInput, "dft: length must be at least 4, got " + std::to_string(n));
  std::vector<cx> buf(n);
  for (std::size_t j = 0; j < n; ++j) buf[j] = cx(x.re[j], x.im[j]);
  plan_for(n).execute(buf, inverse);
  ComplexVec out(n);
  const double scale = inverse ? 1.0 / static_cast<double>(n) : 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.re[k] = buf[k].real() * scale;
    out.im[k] = buf[k].imag() * scale;
  }
  return out;
}

}  // namespace

void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
  plan_for(data.size()).execute(data, inverse);
}

ComplexVec dft(const ComplexVec& x) { return transform(x, false); }

ComplexVec inverse_dft(const ComplexVec& x) { return transform(x, true); }

RealVec log_magnitude(std::span<const double> h) {
  if (!(h.size() % 4 == 0 && !h.empty())) {
    fail(ErrorKind::kConfig, "log_magnitude: length " + std::to_string(h.size()) + " is not divisible by 4");
  }
  std::vector<cx> buf(h.begin(), h.end());
  fft_inplace(buf);
  RealVec out(h.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::log1p(std::abs(buf[k]));
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double l2_norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace spark::numkit
