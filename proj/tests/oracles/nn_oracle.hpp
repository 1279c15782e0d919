#pragma once

// Reference forward pass written with plain loops over the flat parameter
// layout, plus a central finite-difference gradient.

#include <cmath>
#include <functional>
#include <vector>

#include "acd/mlp.hpp"

namespace oracle {

inline std::vector<double> naive_forward(const std::vector<std::size_t>& dims, const std::vector<double>& theta,
                                         bool softmax_head, const std::vector<double>& input) {
  std::vector<double> x = input;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1];
    std::vector<double> y(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < in; ++c) s += theta[offset + r * in + c] * x[c];
      y[r] = s + theta[offset + out * in + r];
    }
    offset += out * in + out;
    if (l + 2 < dims.size()) {
      for (auto& v : y) v = std::tanh(v);
    }
    x = std::move(y);
  }
  if (softmax_head) {
    double m = x[0];
    for (double v : x) m = std::max(m, v);
    double z = 0.0;
    for (auto& v : x) z += (v = std::exp(v - m));
    for (auto& v : x) v /= z;
  }
  return x;
}

// d loss / d theta[i] by (f(theta + h e_i) - f(theta - h e_i)) / 2h.
inline double central_difference(acd::Mlp net, std::size_t i, const std::function<double(const acd::Mlp&)>& loss,
                                 double h = 1e-5) {
  const double base = net.parameters()[i];
  net.mutable_parameters()[i] = base + h;
  const double up = loss(net);
  net.mutable_parameters()[i] = base - h;
  const double down = loss(net);
  return (up - down) / (2.0 * h);
}

// |a - b| relative to the larger magnitude, floored at 1e-6 so that
// vanishing partials compare absolutely.
inline double relative_error(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-6});
  return std::abs(a - b) / scale;
}

}  // namespace oracle
