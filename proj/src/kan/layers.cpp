#include "spark/kan/layers.hpp"

#include <cmath>

#include "spark/error.hpp"
#include "spark/numkit/math.hpp"
#include "spark/numkit/ops.hpp"

namespace spark::kan {

namespace ops = numkit::ops;

Var kan_expert_op(Var h, Var coeffs, Var base_weight, const SplineGrid& grid) {
  const std::size_t in_dim = h.size();
  const std::size_t nb = grid.n_basis();
  if (!(in_dim > 0 && base_weight.size() % in_dim == 0)) {
    fail(ErrorKind::kInvalidInput, "kan expert: input length " + std::to_string(in_dim) +
                                   " does not match base weight");
  }
  const std::size_t out_dim = base_weight.size() / in_dim;
  require(coeffs.size() == out_dim * in_dim * nb, ErrorKind::kInvalidInput, "kan expert: coeffs shape mismatch");

  const std::size_t width = static_cast<std::size_t>(grid.degree) + 1;
  auto hv = h.value();
  auto cv = coeffs.value();
  auto bv = base_weight.value();
  // Per-input local basis, its derivative, and first basis index.
  std::vector<double> basis(in_dim * width);
  std::vector<double> dbasis(in_dim * width);
  std::vector<std::size_t> first(in_dim);
  std::vector<double> act(in_dim);
  for (std::size_t i = 0; i < in_dim; ++i) {
    first[i] = bspline_local(hv[i], grid, basis.data() + i * width, dbasis.data() + i * width);
    act[i] = numkit::silu(hv[i]);
  }
  std::vector<double> out(out_dim, 0.0);
  for (std::size_t o = 0; o < out_dim; ++o) {
    double acc = 0.0;
    for (std::size_t i = 0; i < in_dim; ++i) {
      acc += bv[o * in_dim + i] * act[i];
      const double* c = cv.data() + (o * in_dim + i) * nb + first[i];
      const double* b = basis.data() + i * width;
      for (std::size_t r = 0; r < width; ++r) acc += c[r] * b[r];
    }
    out[o] = acc;
  }
  return h.tape->record(
      std::move(out), {h, coeffs, base_weight},
      [=, basis = std::move(basis), dbasis = std::move(dbasis), first = std::move(first),
       act = std::move(act)](Tape& t, Var self) {
        auto g = t.grad(self);
        auto hv = t.value(h);
        auto cv = t.value(coeffs);
        auto bv = t.value(base_weight);
        const bool gh = t.requires_grad(h);
        const bool gc = t.requires_grad(coeffs);
        const bool gb = t.requires_grad(base_weight);
        for (std::size_t o = 0; o < out_dim; ++o) {
          const double go = g[o];
          if (go == 0.0) continue;
          for (std::size_t i = 0; i < in_dim; ++i) {
            const std::size_t ci = (o * in_dim + i) * nb + first[i];
            const double* b = basis.data() + i * width;
            if (gb) t.grad_mut(base_weight)[o * in_dim + i] += go * act[i];
            if (gc) {
              double* dc = t.grad_mut(coeffs).data() + ci;
              for (std::size_t r = 0; r < width; ++r) dc[r] += go * b[r];
            }
            if (gh) {
              const double* db = dbasis.data() + i * width;
              const double* c = cv.data() + ci;
              double d = bv[o * in_dim + i] * numkit::silu_derivative(hv[i]);
              for (std::size_t r = 0; r < width; ++r) d += c[r] * db[r];
              t.grad_mut(h)[i] += go * d;
            }
          }
        }
      });
}

KanExpert::KanExpert(std::string prefix, std::size_t in_dim, std::size_t out_dim, SplineGrid grid)
    : in_dim_(in_dim),
      out_dim_(out_dim),
      grid_(std::move(grid)),
      coeffs_name_(prefix + ".coeffs"),
      base_name_(prefix + ".base") {}

void KanExpert::init(ParameterStore& store, Rng& rng) const {
  auto& coeffs = store.add(coeffs_name_, out_dim_, in_dim_ * grid_.n_basis());
  auto& base = store.add(base_name_, out_dim_, in_dim_);
  const double fan_in = static_cast<double>(in_dim_);
  numkit::fill_normal(coeffs.value, 0.1 / std::sqrt(fan_in), rng);
  numkit::fill_normal(base.value, 1.0 / std::sqrt(fan_in), rng);
}

Var KanExpert::forward(Tape& tape, ParameterStore& store, Var h) const {
  if (!(h.size() == in_dim_)) {
    fail(ErrorKind::kInvalidInput, "expert_forward: expected input of length " + std::to_string(in_dim_) +
                                   ", got " + std::to_string(h.size()));
  }
  return kan_expert_op(h, tape.parameter(store, coeffs_name_), tape.parameter(store, base_name_), grid_);
}

std::size_t KanExpert::parameter_count() const { return out_dim_ * in_dim_ * (grid_.n_basis() + 1); }

MoeGate::MoeGate(std::string prefix, std::size_t band_dim, std::size_t n_experts)
    : band_dim_(band_dim), n_experts_(n_experts), weight_name_(prefix + ".w"), bias_name_(prefix + ".b") {}

void MoeGate::init(ParameterStore& store, Rng& rng) const {
  auto& w = store.add(weight_name_, n_experts_, band_dim_);
  store.add(bias_name_, n_experts_, 1);
  numkit::fill_normal(w.value, 0.1 / std::sqrt(static_cast<double>(band_dim_)), rng);
}

Var MoeGate::forward(Tape& tape, ParameterStore& store, Var h) const {
  if (!(h.size() == band_dim_)) {
    fail(ErrorKind::kInvalidInput, "gate_forward: expected input of length " + std::to_string(band_dim_) +
                                   ", got " + std::to_string(h.size()));
  }
  const Var b = tape.parameter(store, bias_name_);
  return ops::softmax(ops::linear(h, tape.parameter(store, weight_name_), n_experts_, &b));
}

KanBandLayer::KanBandLayer(std::string prefix, std::size_t band_dim, std::size_t n_experts, SplineGrid grid)
    : band_dim_(band_dim),
      base_name_(prefix + ".base"),
      scale_name_(prefix + ".prescale.s"),
      shift_name_(prefix + ".prescale.t"),
      gate_(prefix + ".gate", band_dim, n_experts) {
  require(n_experts >= 1, ErrorKind::kConfig, "a band layer needs at least one expert");
  for (std::size_t e = 0; e < n_experts; ++e) {
    experts_.emplace_back(prefix + ".expert" + std::to_string(e), band_dim, band_dim, grid);
  }
}

void KanBandLayer::init(ParameterStore& store, Rng& rng) const {
  auto& base = store.add(base_name_, band_dim_, band_dim_);
  numkit::fill_normal(base.value, 1.0 / std::sqrt(static_cast<double>(band_dim_)), rng);
  auto& s = store.add(scale_name_, band_dim_, 1);
  auto& t = store.add(shift_name_, band_dim_, 1);
  std::fill(s.value.begin(), s.value.end(), 1.0);
  std::fill(t.value.begin(), t.value.end(), -1.0);
  for (const auto& e : experts_) e.init(store, rng);
  gate_.init(store, rng);
}

Var KanBandLayer::forward(Tape& tape, ParameterStore& store, Var h) const {
  if (!(h.size() == band_dim_)) {
    fail(ErrorKind::kInvalidInput, "kan_band_forward: expected input of length " + std::to_string(band_dim_) +
                                   ", got " + std::to_string(h.size()));
  }
  const Var linear = ops::linear(h, tape.parameter(store, base_name_), band_dim_);
  const Var scaled =
      ops::add(ops::mul(h, tape.parameter(store, scale_name_)), tape.parameter(store, shift_name_));
  std::vector<Var> outputs;
  outputs.reserve(experts_.size());
  for (const auto& e : experts_) outputs.push_back(e.forward(tape, store, scaled));
  const Var alpha = gate_.forward(tape, store, h);
  return ops::add(linear, ops::mix(outputs, alpha));
}

std::size_t KanBandLayer::parameter_count() const {
  std::size_t n = band_dim_ * band_dim_ + 2 * band_dim_ + gate_.parameter_count();
  for (const auto& e : experts_) n += e.parameter_count();
  return n;
}

DenseBandLayer::DenseBandLayer(std::string prefix, std::size_t band_dim)
    : band_dim_(band_dim), weight_name_(prefix + ".dense.w"), bias_name_(prefix + ".dense.b") {}

void DenseBandLayer::init(ParameterStore& store, Rng& rng) const {
  auto& w = store.add(weight_name_, band_dim_, band_dim_);
  store.add(bias_name_, band_dim_, 1);
  numkit::fill_normal(w.value, 1.0 / std::sqrt(static_cast<double>(band_dim_)), rng);
}

Var DenseBandLayer::forward(Tape& tape, ParameterStore& store, Var h) const {
  require(h.size() == band_dim_, ErrorKind::kInvalidInput, "dense band layer: input length mismatch");
  const Var b = tape.parameter(store, bias_name_);
  return ops::silu(ops::linear(h, tape.parameter(store, weight_name_), band_dim_, &b));
}

}  // namespace spark::kan
