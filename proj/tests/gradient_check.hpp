#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "uavedge/nn.hpp"
#include "uavedge/rng.hpp"

namespace uavedge::oracles {

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t parameters = 0;
};

// Relative error with a small floor so exactly-zero gradients compare as absolute error.
inline double relative_error(double analytic, double numeric) {
  return std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), 1e-7});
}

// 0.5 * ||net(x) - target||^2
inline double half_squared_error(const QNetwork& net, const std::vector<double>& x,
                                 const std::vector<double>& target) {
  const std::vector<double> q = net.predict(x);
  double loss = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) loss += 0.5 * (q[i] - target[i]) * (q[i] - target[i]);
  return loss;
}

// Compares backward() against central differences with step h on every
// parameter of `net` for one (input, target) pair.
inline GradientCheck check_gradients(QNetwork net, const std::vector<double>& x,
                                     const std::vector<double>& target, double h = 1e-5) {
  const ForwardCache cache = net.forward(x);
  Matrix dq(1, net.output_dim());
  for (std::size_t i = 0; i < dq.cols; ++i) dq(0, i) = cache.output()(0, i) - target[i];
  const Gradients grads = net.backward(cache, dq);

  GradientCheck out;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = half_squared_error(net, x, target);
    param = saved - h;
    const double down = half_squared_error(net, x, target);
    param = saved;
    const double numeric = (up - down) / (2 * h);
    out.max_rel_error = std::max(out.max_rel_error, relative_error(analytic, numeric));
    ++out.parameters;
  };
  for (std::size_t k = 0; k < net.specs().size(); ++k) {
    LayerParams& p = net.mutable_params()[k];
    for (std::size_t i = 0; i < p.weights.size(); ++i) probe(p.weights[i], grads[k].weights[i]);
    for (std::size_t i = 0; i < p.bias.size(); ++i) probe(p.bias[i], grads[k].bias[i]);
  }
  return out;
}

struct RandomCase {
  QNetwork net;
  std::vector<double> x;
  std::vector<double> target;
};

// Random net with 1-3 layers and widths <= 32, random input and target.
// Inputs are redrawn while any hidden pre-activation sits within 1e-3 of the
// ReLU kink, where a finite difference straddles the non-differentiable point.
inline RandomCase random_gradient_case(Rng& rng) {
  const std::size_t layers = 1 + rng.index(3);
  std::vector<std::size_t> dims = {1 + rng.index(32)};
  for (std::size_t k = 0; k < layers; ++k) dims.push_back(1 + rng.index(32));
  std::vector<std::size_t> hidden(dims.begin() + 1, dims.end() - 1);
  QNetwork net(mlp_specs(dims.front(), hidden, dims.back()), rng.next_u64());
  for (LayerParams& p : net.mutable_params()) {
    for (double& b : p.bias) b = rng.uniform(-0.5, 0.5);
  }
  std::vector<double> x(dims.front());
  while (true) {
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const ForwardCache cache = net.forward(x);
    bool near_kink = false;
    for (std::size_t k = 0; k + 1 < cache.pre_activations.size(); ++k) {
      for (double z : cache.pre_activations[k].data) near_kink = near_kink || std::fabs(z) < 1e-3;
    }
    if (!near_kink) break;
  }
  std::vector<double> target(dims.back());
  for (double& v : target) v = rng.uniform(-2.0, 2.0);
  return {std::move(net), std::move(x), std::move(target)};
}

}  // namespace uavedge::oracles
