#pragma once

#include <span>

#include "spark/numkit/tensor.hpp"

namespace spark::numkit {

double sigmoid(double x);
double silu(double x);
double silu_derivative(double x);

// Max-subtracted softmax.
RealVec softmax(std::span<const double> logits);

// (v - mean) / sqrt(var + eps) * gain + bias, population variance. When
// var + eps is zero the normalized value is taken as 0.
RealVec layer_norm(std::span<const double> v, std::span<const double> gain, std::span<const double> bias,
                   double eps);

// -[y ln s(z) + (1-y) ln(1 - s(z))] in the form max(z,0) - z y + ln(1 + e^-|z|).
double bce_with_logits(double logit, int label);

}  // namespace spark::numkit
