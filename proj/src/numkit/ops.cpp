#include "spark/numkit/ops.hpp"

#include <cmath>
#include <complex>
#include <vector>

#include "spark/error.hpp"
#include "spark/numkit/dft.hpp"
#include "spark/numkit/math.hpp"

namespace spark::numkit::ops {
namespace {

void same_size(Var a, Var b, const char* op) {
  if (!(a.size() == b.size())) {
    fail(ErrorKind::kInvalidInput, std::string(op) + ": size mismatch " + std::to_string(a.size()) + " vs " +
                                   std::to_string(b.size()));
  }
}

// Accumulates `scale * g` into v's gradient if it needs one.
void accumulate(Tape& t, Var v, std::span<const double> g, double scale = 1.0) {
  if (!t.requires_grad(v)) return;
  auto dst = t.grad_mut(v);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * g[i];
}

}  // namespace

Var add(Var a, Var b) {
  same_size(a, b, "add");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, Var self) {
    accumulate(t, a, t.grad(self));
    accumulate(t, b, t.grad(self));
  });
}

Var sub(Var a, Var b) {
  same_size(a, b, "sub");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, Var self) {
    accumulate(t, a, t.grad(self));
    accumulate(t, b, t.grad(self), -1.0);
  });
}

Var mul(Var a, Var b) {
  same_size(a, b, "mul");
  auto av = a.value();
  auto bv = b.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return a.tape->record(std::move(out), {a, b}, [a, b](Tape& t, Var self) {
    auto g = t.grad(self);
    if (t.requires_grad(a)) {
      auto ga = t.grad_mut(a);
      auto bv = t.value(b);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (t.requires_grad(b)) {
      auto gb = t.grad_mut(b);
      auto av = t.value(a);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double s) {
  auto av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * av[i];
  return a.tape->record(std::move(out), {a}, [a, s](Tape& t, Var self) { accumulate(t, a, t.grad(self), s); });
}

Var silu(Var a) {
  auto av = a.value();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = numkit::silu(av[i]);
  return a.tape->record(std::move(out), {a}, [a](Tape& t, Var self) {
    auto g = t.grad(self);
    auto av = t.value(a);
    auto ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * silu_derivative(av[i]);
  });
}

Var linear(Var x, Var w, std::size_t out_dim, const Var* bias, std::size_t rows) {
  require(out_dim > 0 && rows > 0, ErrorKind::kInvalidInput, "linear: empty shape");
  require(w.size() % out_dim == 0, ErrorKind::kInvalidInput, "linear: weight size not a multiple of out_dim");
  const std::size_t in_dim = w.size() / out_dim;
  if (!(x.size() == rows * in_dim)) {
    fail(ErrorKind::kInvalidInput, "linear: input size " + std::to_string(x.size()) + " does not match " +
                                   std::to_string(rows) + " x " + std::to_string(in_dim));
  }
  if (bias != nullptr) {
    require(bias->size() == out_dim, ErrorKind::kInvalidInput, "linear: bias size mismatch");
  }
  auto xv = x.value();
  auto wv = w.value();
  std::vector<double> out(rows * out_dim);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = xv.data() + r * in_dim;
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* wo = wv.data() + o * in_dim;
      double acc = bias != nullptr ? bias->value()[o] : 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += wo[i] * xr[i];
      out[r * out_dim + o] = acc;
    }
  }
  std::vector<Var> inputs{x, w};
  if (bias != nullptr) inputs.push_back(*bias);
  const bool has_bias = bias != nullptr;
  const Var b = has_bias ? *bias : Var{};
  return x.tape->record(std::move(out), inputs, [=](Tape& t, Var self) {
    auto g = t.grad(self);
    auto xv = t.value(x);
    auto wv = t.value(w);
    const bool gx = t.requires_grad(x);
    const bool gw = t.requires_grad(w);
    std::span<double> dx = gx ? t.grad_mut(x) : std::span<double>{};
    std::span<double> dw = gw ? t.grad_mut(w) : std::span<double>{};
    for (std::size_t r = 0; r < rows; ++r) {
      const double* xr = xv.data() + r * in_dim;
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double go = g[r * out_dim + o];
        if (go == 0.0) continue;
        if (gw) {
          double* dwo = dw.data() + o * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) dwo[i] += go * xr[i];
        }
        if (gx) {
          const double* wo = wv.data() + o * in_dim;
          double* dxr = dx.data() + r * in_dim;
          for (std::size_t i = 0; i < in_dim; ++i) dxr[i] += go * wo[i];
        }
      }
    }
    if (has_bias && t.requires_grad(b)) {
      auto db = t.grad_mut(b);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < out_dim; ++o) db[o] += g[r * out_dim + o];
      }
    }
  });
}

Var slice(Var a, std::size_t offset, std::size_t length) {
  require(offset + length <= a.size(), ErrorKind::kInvalidInput, "slice: range out of bounds");
  auto av = a.value();
  std::vector<double> out(av.begin() + offset, av.begin() + offset + length);
  return a.tape->record(std::move(out), {a}, [a, offset](Tape& t, Var self) {
    if (!t.requires_grad(a)) return;
    auto g = t.grad(self);
    auto ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[offset + i] += g[i];
  });
}

Var concat(std::span<const Var> parts) {
  require(!parts.empty(), ErrorKind::kInvalidInput, "concat: no inputs");
  std::vector<double> out;
  for (const Var& p : parts) {
    auto pv = p.value();
    out.insert(out.end(), pv.begin(), pv.end());
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape->record(std::move(out), parts, [inputs](Tape& t, Var self) {
    auto g = t.grad(self);
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t n = t.value(p).size();
      accumulate(t, p, g.subspan(offset, n));
      offset += n;
    }
  });
}

Var softmax(Var a) {
  std::vector<double> out = numkit::softmax(a.value());
  return a.tape->record(std::move(out), {a}, [a](Tape& t, Var self) {
    if (!t.requires_grad(a)) return;
    auto g = t.grad(self);
    auto y = t.value(self);
    double inner = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * y[i];
    auto ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - inner);
  });
}

Var layer_norm(Var a, Var gain, Var bias, double eps) {
  same_size(a, gain, "layer_norm");
  same_size(a, bias, "layer_norm");
  std::vector<double> out = numkit::layer_norm(a.value(), gain.value(), bias.value(), eps);
  return a.tape->record(std::move(out), {a, gain, bias}, [a, gain, bias, eps](Tape& t, Var self) {
    auto g = t.grad(self);
    auto x = t.value(a);
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= nd;
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= nd;
    const double denom = var + eps;
    const double inv_std = denom > 0.0 ? 1.0 / std::sqrt(denom) : 0.0;
    std::vector<double> xhat(n);
    for (std::size_t i = 0; i < n; ++i) xhat[i] = (x[i] - mean) * inv_std;
    if (t.requires_grad(gain)) {
      auto dg = t.grad_mut(gain);
      for (std::size_t i = 0; i < n; ++i) dg[i] += g[i] * xhat[i];
    }
    accumulate(t, bias, g);
    if (t.requires_grad(a)) {
      auto gv = t.value(gain);
      double mean_d = 0.0;
      double mean_dx = 0.0;
      std::vector<double> dxhat(n);
      for (std::size_t i = 0; i < n; ++i) {
        dxhat[i] = g[i] * gv[i];
        mean_d += dxhat[i];
        mean_dx += dxhat[i] * xhat[i];
      }
      mean_d /= nd;
      mean_dx /= nd;
      auto da = t.grad_mut(a);
      for (std::size_t i = 0; i < n; ++i) da[i] += inv_std * (dxhat[i] - mean_d - xhat[i] * mean_dx);
    }
  });
}

Var log_magnitude(Var a) {
  auto av = a.value();
  if (!(!av.empty() && av.size() % 4 == 0)) {
    fail(ErrorKind::kConfig, "log_magnitude: length " + std::to_string(av.size()) + " is not divisible by 4");
  }
  std::vector<std::complex<double>> spectrum(av.begin(), av.end());
  fft_inplace(spectrum);
  std::vector<double> out(av.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::log1p(std::abs(spectrum[k]));
  return a.tape->record(std::move(out), {a}, [a, spectrum = std::move(spectrum)](Tape& t, Var self) {
    if (!t.requires_grad(a)) return;
    // d|X_k|/dh_j = Re(conj(X_k) e^{-2 pi i jk/n}) / |X_k|, so the input
    // gradient is Re(DFT(w * conj(X))) with w_k = g_k / ((1 + |X_k|) |X_k|).
    auto g = t.grad(self);
    const std::size_t n = spectrum.size();
    std::vector<std::complex<double>> buf(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double mag = std::abs(spectrum[k]);
      if (mag == 0.0) continue;
      buf[k] = std::conj(spectrum[k]) * (g[k] / ((1.0 + mag) * mag));
    }
    fft_inplace(buf);
    auto ga = t.grad_mut(a);
    for (std::size_t j = 0; j < n; ++j) ga[j] += buf[j].real();
  });
}

Var mix(std::span<const Var> values, Var weights) {
  require(!values.empty() && weights.size() == values.size(), ErrorKind::kInvalidInput,
          "mix: need one weight per value");
  const std::size_t n = values[0].size();
  auto wv = weights.value();
  std::vector<double> out(n, 0.0);
  for (std::size_t e = 0; e < values.size(); ++e) {
    require(values[e].size() == n, ErrorKind::kInvalidInput, "mix: values differ in size");
    auto v = values[e].value();
    for (std::size_t i = 0; i < n; ++i) out[i] += wv[e] * v[i];
  }
  std::vector<Var> inputs(values.begin(), values.end());
  inputs.push_back(weights);
  return weights.tape->record(std::move(out), inputs, [inputs](Tape& t, Var self) {
    auto g = t.grad(self);
    const Var weights = inputs.back();
    auto wv = t.value(weights);
    const std::size_t count = inputs.size() - 1;
    for (std::size_t e = 0; e < count; ++e) {
      accumulate(t, inputs[e], g, wv[e]);
    }
    if (t.requires_grad(weights)) {
      auto gw = t.grad_mut(weights);
      for (std::size_t e = 0; e < count; ++e) gw[e] += dot(g, t.value(inputs[e]));
    }
  });
}

RealVec attention_weights(std::span<const double> q, std::span<const double> k, std::size_t tokens,
                          std::size_t heads, std::size_t head) {
  const std::size_t model_dim = q.size() / tokens;
  const std::size_t head_dim = model_dim / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  RealVec weights(tokens * tokens);
  std::vector<double> scores(tokens);
  for (std::size_t i = 0; i < tokens; ++i) {
    const double* qi = q.data() + i * model_dim + head * head_dim;
    for (std::size_t j = 0; j < tokens; ++j) {
      const double* kj = k.data() + j * model_dim + head * head_dim;
      double s = 0.0;
      for (std::size_t c = 0; c < head_dim; ++c) s += qi[c] * kj[c];
      scores[j] = s * inv_sqrt;
    }
    RealVec row = numkit::softmax(scores);
    std::copy(row.begin(), row.end(), weights.begin() + i * tokens);
  }
  return weights;
}

Var attention(Var q, Var k, Var v, std::size_t tokens, std::size_t heads) {
  require(tokens > 0 && heads > 0, ErrorKind::kInvalidInput, "attention: empty shape");
  same_size(q, k, "attention");
  same_size(q, v, "attention");
  require(q.size() % tokens == 0, ErrorKind::kInvalidInput, "attention: size not divisible by token count");
  const std::size_t model_dim = q.size() / tokens;
  require(model_dim % heads == 0, ErrorKind::kInvalidInput, "attention: width not divisible by head count");
  const std::size_t head_dim = model_dim / heads;

  auto qv = q.value();
  auto kv = k.value();
  auto vv = v.value();
  // weights[h][i][j]
  std::vector<double> weights(heads * tokens * tokens);
  std::vector<double> out(q.size(), 0.0);
  for (std::size_t h = 0; h < heads; ++h) {
    RealVec w = attention_weights(qv, kv, tokens, heads, h);
    std::copy(w.begin(), w.end(), weights.begin() + h * tokens * tokens);
    for (std::size_t i = 0; i < tokens; ++i) {
      double* oi = out.data() + i * model_dim + h * head_dim;
      for (std::size_t j = 0; j < tokens; ++j) {
        const double a = w[i * tokens + j];
        const double* vj = vv.data() + j * model_dim + h * head_dim;
        for (std::size_t c = 0; c < head_dim; ++c) oi[c] += a * vj[c];
      }
    }
  }
  return q.tape->record(std::move(out), {q, k, v}, [=, weights = std::move(weights)](Tape& t, Var self) {
    auto g = t.grad(self);
    auto qv = t.value(q);
    auto kv = t.value(k);
    auto vv = t.value(v);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
    const bool gq = t.requires_grad(q);
    const bool gk = t.requires_grad(k);
    const bool gv = t.requires_grad(v);
    std::vector<double> dscore(tokens);
    for (std::size_t h = 0; h < heads; ++h) {
      const double* w = weights.data() + h * tokens * tokens;
      for (std::size_t i = 0; i < tokens; ++i) {
        const double* gi = g.data() + i * model_dim + h * head_dim;
        // d weight_ij = g_i . v_j
        double inner = 0.0;
        for (std::size_t j = 0; j < tokens; ++j) {
          const double* vj = vv.data() + j * model_dim + h * head_dim;
          double da = 0.0;
          for (std::size_t c = 0; c < head_dim; ++c) da += gi[c] * vj[c];
          dscore[j] = da;
          inner += w[i * tokens + j] * da;
          if (gv) {
            double* dvj = t.grad_mut(v).data() + j * model_dim + h * head_dim;
            for (std::size_t c = 0; c < head_dim; ++c) dvj[c] += w[i * tokens + j] * gi[c];
          }
        }
        for (std::size_t j = 0; j < tokens; ++j) dscore[j] = w[i * tokens + j] * (dscore[j] - inner) * inv_sqrt;
        const double* qi = qv.data() + i * model_dim + h * head_dim;
        for (std::size_t j = 0; j < tokens; ++j) {
          const double* kj = kv.data() + j * model_dim + h * head_dim;
          if (gq) {
            double* dqi = t.grad_mut(q).data() + i * model_dim + h * head_dim;
            for (std::size_t c = 0; c < head_dim; ++c) dqi[c] += dscore[j] * kj[c];
          }
          if (gk) {
            double* dkj = t.grad_mut(k).data() + j * model_dim + h * head_dim;
            for (std::size_t c = 0; c < head_dim; ++c) dkj[c] += dscore[j] * qi[c];
          }
        }
      }
    }
  });
}

Var sum(Var a) {
  double total = 0.0;
  for (double x : a.value()) total += x;
  return a.tape->record({total}, {a}, [a](Tape& t, Var self) {
    if (!t.requires_grad(a)) return;
    const double g = t.grad(self)[0];
    for (double& d : t.grad_mut(a)) d += g;
  });
}

Var squared_distance(Var a, Var b) {
  same_size(a, b, "squared_distance");
  auto av = a.value();
  auto bv = b.value();
  double total = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) total += (av[i] - bv[i]) * (av[i] - bv[i]);
  return a.tape->record({total}, {a, b}, [a, b](Tape& t, Var self) {
    const double g = t.grad(self)[0];
    auto av = t.value(a);
    auto bv = t.value(b);
    const bool ga = t.requires_grad(a);
    const bool gb = t.requires_grad(b);
    for (std::size_t i = 0; i < av.size(); ++i) {
      const double d = 2.0 * g * (av[i] - bv[i]);
      if (ga) t.grad_mut(a)[i] += d;
      if (gb) t.grad_mut(b)[i] -= d;
    }
  });
}

Var bce_with_logits(Var logit, int label) {
  const double z = logit.scalar();
  const double loss = numkit::bce_with_logits(z, label);
  return logit.tape->record({loss}, {logit}, [logit, label](Tape& t, Var self) {
    if (!t.requires_grad(logit)) return;
    t.grad_mut(logit)[0] += t.grad(self)[0] * (sigmoid(t.value(logit)[0]) - label);
  });
}

}  // namespace spark::numkit::ops
