#pragma once

// Regularized empirical risk minimization for bottleneck nets by full-batch,
// fixed-step subgradient descent. Gradients are hand-written backprop.
//
// Subgradient conventions: ρ'(0) = 0, sign(0) = 0, ∇‖w‖₂ at w = 0 is 0.
// All reductions run in a fixed order, so a run is bit-reproducible.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "deepridge/network.hpp"
#include "deepridge/norms.hpp"
#include "deepridge/rescale.hpp"

namespace deepridge {

struct Dataset {
  std::vector<Vector> inputs;
  std::vector<Vector> targets;

  std::size_t size() const { return inputs.size(); }
  std::size_t input_dim() const { return inputs.empty() ? 0 : inputs.front().size(); }
  std::size_t target_dim() const { return targets.empty() ? 0 : targets.front().size(); }

  void validate() const {
    if (inputs.empty()) throw ValidationError("dataset is empty");
    if (inputs.size() != targets.size()) {
      throw ValidationError("dataset has " + std::to_string(inputs.size()) + " inputs but " +
                            std::to_string(targets.size()) + " targets");
    }
    for (std::size_t n = 0; n < inputs.size(); ++n) {
      if (inputs[n].size() != input_dim() || targets[n].size() != target_dim()) {
        throw ValidationError("dataset row " + std::to_string(n + 1) + " has inconsistent arity");
      }
      if (!all_finite(inputs[n]) || !all_finite(targets[n])) {
        throw ValidationError("dataset row " + std::to_string(n + 1) + " has non-finite values");
      }
    }
  }
};

enum class LossKind { squared };

struct TrainConfig {
  std::vector<std::size_t> widths;
  /// d_1..d_{L−1}. Empty means every hidden dimension equals d_0.
  std::vector<std::size_t> hidden_dims;
  RegularizerSpec regularizer;
  LossKind loss = LossKind::squared;
  double step_size = 1e-3;
  std::size_t epochs = 1000;
  std::uint64_t seed = 0;
  double init_scale = 1.0;
  double prune_eps = 0.0;
  std::size_t rebalance_every = 0;

  void validate() const {
    if (widths.empty()) throw ValidationError("config: widths must list at least one layer");
    if (!hidden_dims.empty() && hidden_dims.size() + 1 != widths.size()) {
      throw ValidationError("config: hidden_dims needs " + std::to_string(widths.size() - 1) +
                            " entries");
    }
    if (!(step_size > 0.0) || !std::isfinite(step_size)) {
      throw ValidationError("config: step_size must be positive");
    }
    if (!(prune_eps >= 0.0)) throw ValidationError("config: prune_eps must be nonnegative");
    if (!std::isfinite(init_scale)) throw ValidationError("config: init_scale must be finite");
    regularizer.validate();
  }
};

struct TrainReport {
  std::vector<double> objectives;  // epochs + 1 entries, the first at initialization
  double final_data_loss = 0.0;
  double final_regularizer = 0.0;
  std::vector<std::size_t> active_neurons;
  double path_core = 0.0;
  double weight_decay_core = 0.0;
};

// ---------------------------------------------------------------------------
// Parameter plumbing
// ---------------------------------------------------------------------------

/// Layer-major flattening: V, W, b, C, c0, each row-major.
inline std::size_t parameter_count(const DeepNet& net) {
  std::size_t n = 0;
  for (const auto& l : net.layers) n += l.V.size() + l.W.size() + l.b.size() + l.C.size() + l.c0.size();
  return n;
}

inline Vector flatten(const DeepNet& net) {
  Vector out;
  out.reserve(parameter_count(net));
  for (const auto& l : net.layers) {
    out.insert(out.end(), l.V.data().begin(), l.V.data().end());
    out.insert(out.end(), l.W.data().begin(), l.W.data().end());
    out.insert(out.end(), l.b.begin(), l.b.end());
    out.insert(out.end(), l.C.data().begin(), l.C.data().end());
    out.insert(out.end(), l.c0.begin(), l.c0.end());
  }
  return out;
}

/// Copy of `shape` with parameters taken from `params` in flatten() order.
inline DeepNet unflatten(const DeepNet& shape, std::span<const double> params) {
  if (params.size() != parameter_count(shape)) throw ValidationError("unflatten: size mismatch");
  DeepNet out = shape;
  auto it = params.begin();
  const auto fill = [&it](std::vector<double>& dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  for (auto& l : out.layers) {
    fill(l.V.data());
    fill(l.W.data());
    fill(l.b);
    fill(l.C.data());
    fill(l.c0);
  }
  return out;
}

/// net += alpha * direction, entrywise over all parameters.
inline void axpy(DeepNet& net, double alpha, const DeepNet& direction) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    auto& dst = net.layers[l];
    const auto& src = direction.layers[l];
    const auto add = [alpha](std::vector<double>& a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += alpha * b[i];
    };
    add(dst.V.data(), src.V.data());
    add(dst.W.data(), src.W.data());
    add(dst.b, src.b);
    add(dst.C.data(), src.C.data());
    add(dst.c0, src.c0);
  }
}

inline DeepNet zeros_like(const DeepNet& net) {
  DeepNet out;
  for (const auto& l : net.layers) {
    out.layers.push_back(BottleneckLayer::zeros(l.in_dim(), l.out_dim(), l.width()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Objective
// ---------------------------------------------------------------------------

/// Σ_n ½ ‖f(x_n) − y_n‖₂².
inline double loss_value(const DeepNet& net, const Dataset& data, LossKind = LossKind::squared) {
  if (data.inputs.size() != data.targets.size()) throw ValidationError("loss: ragged dataset");
  double s = 0.0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    const Vector out = forward(net, data.inputs[n]);
    const auto& y = data.targets[n];
    if (out.size() != y.size()) {
      throw ValidationError("loss: network outputs " + std::to_string(out.size()) +
                            " values but target has " + std::to_string(y.size()));
    }
    double r = 0.0;
    for (std::size_t m = 0; m < y.size(); ++m) r += (out[m] - y[m]) * (out[m] - y[m]);
    s += 0.5 * r;
  }
  return s;
}

inline double objective_value(const DeepNet& net, const Dataset& data, const RegularizerSpec& spec,
                              LossKind loss = LossKind::squared) {
  return loss_value(net, data, loss) + regularizer_value(net, spec);
}

namespace detail {

/// Backpropagates an output cotangent `grad_out` through one layer evaluated
/// at `x`, accumulating parameter gradients into `g`. Returns the input
/// cotangent.
inline Vector layer_backward(const BottleneckLayer& layer, std::span<const double> x,
                             std::span<const double> grad_out, BottleneckLayer& g) {
  const std::size_t K = layer.width();
  Vector pre = matvec(layer.W, x);
  for (std::size_t k = 0; k < K; ++k) pre[k] -= layer.b[k];

  for (std::size_t m = 0; m < layer.out_dim(); ++m) {
    const double gm = grad_out[m];
    if (gm == 0.0) continue;
    for (std::size_t k = 0; k < K; ++k) g.V(m, k) += gm * relu(pre[k]);
    for (std::size_t i = 0; i < layer.in_dim(); ++i) g.C(m, i) += gm * x[i];
    g.c0[m] += gm;
  }

  Vector delta = matvec_transposed(layer.V, grad_out);
  for (std::size_t k = 0; k < K; ++k) {
    if (!(pre[k] > 0.0)) delta[k] = 0.0;
    if (delta[k] == 0.0) continue;
    for (std::size_t i = 0; i < layer.in_dim(); ++i) g.W(k, i) += delta[k] * x[i];
    g.b[k] -= delta[k];
  }

  Vector grad_in = matvec_transposed(layer.W, delta);
  const Vector skip = matvec_transposed(layer.C, grad_out);
  for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] += skip[i];
  return grad_in;
}

inline void add_path_gradient(const BottleneckLayer& layer, double scale, BottleneckLayer& g) {
  for (std::size_t k = 0; k < layer.width(); ++k) {
    const double v_norm = column_l1(layer.V, k);
    const double w_norm = l2_norm(layer.W.row(k));
    for (std::size_t m = 0; m < layer.out_dim(); ++m) g.V(m, k) += scale * sign(layer.V(m, k)) * w_norm;
    if (w_norm > 0.0) {
      for (std::size_t i = 0; i < layer.in_dim(); ++i) {
        g.W(k, i) += scale * v_norm * layer.W(k, i) / w_norm;
      }
    }
  }
}

inline void add_weight_decay_gradient(const BottleneckLayer& layer, double scale, BottleneckLayer& g) {
  for (std::size_t k = 0; k < layer.width(); ++k) {
    const double v_norm = column_l1(layer.V, k);
    for (std::size_t m = 0; m < layer.out_dim(); ++m) g.V(m, k) += scale * v_norm * sign(layer.V(m, k));
  }
  for (std::size_t i = 0; i < layer.W.size(); ++i) g.W.data()[i] += scale * layer.W.data()[i];
}

inline void add_skip_l1_gradient(const BottleneckLayer& layer, double scale, BottleneckLayer& g) {
  for (std::size_t i = 0; i < layer.C.size(); ++i) g.C.data()[i] += scale * sign(layer.C.data()[i]);
  for (std::size_t m = 0; m < layer.c0.size(); ++m) g.c0[m] += scale * sign(layer.c0[m]);
}

/// Subgradient of Σ_m |s_m(0)| + Σ_n |s_m(e_n) − s_m(0)|, backpropagated
/// through the layer at each boundary point.
inline void add_boundary_gradient(const BottleneckLayer& layer, double scale, BottleneckLayer& g) {
  const std::size_t d = layer.in_dim();
  const std::size_t D = layer.out_dim();
  Vector origin(d, 0.0);
  const Vector at_origin = layer_forward(layer, origin);
  Vector origin_grad(D);
  for (std::size_t m = 0; m < D; ++m) origin_grad[m] = scale * sign(at_origin[m]);

  Vector point(d, 0.0);
  Vector axis_grad(D);
  for (std::size_t n = 0; n < d; ++n) {
    point[n] = 1.0;
    const Vector at_axis = layer_forward(layer, point);
    for (std::size_t m = 0; m < D; ++m) {
      axis_grad[m] = scale * sign(at_axis[m] - at_origin[m]);
      origin_grad[m] -= axis_grad[m];
    }
    layer_backward(layer, point, axis_grad, g);
    point[n] = 0.0;
  }
  layer_backward(layer, origin, origin_grad, g);
}

}  // namespace detail

/// Gradient of loss + λ·regularizer, shaped like the network.
inline DeepNet gradient(const DeepNet& net, const Dataset& data, const RegularizerSpec& spec,
                        LossKind = LossKind::squared) {
  net.validate();
  spec.validate();
  DeepNet g = zeros_like(net);
  const std::size_t L = net.depth();

  std::vector<Vector> activations(L + 1);
  for (std::size_t n = 0; n < data.size(); ++n) {
    activations[0] = data.inputs[n];
    for (std::size_t l = 0; l < L; ++l) activations[l + 1] = layer_forward(net.layers[l], activations[l]);
    const auto& y = data.targets[n];
    if (y.size() != activations[L].size()) throw ValidationError("gradient: target dimension mismatch");
    Vector cot(y.size());
    for (std::size_t m = 0; m < y.size(); ++m) cot[m] = activations[L][m] - y[m];
    for (std::size_t l = L; l-- > 0;) {
      cot = detail::layer_backward(net.layers[l], activations[l], cot, g.layers[l]);
    }
  }

  const double lambda = spec.lambda;
  if (lambda == 0.0) return g;

  if (spec.kind == RegularizerKind::product_of_paths) {
    std::vector<double> sums(L);
    for (std::size_t l = 0; l < L; ++l) sums[l] = layer_path_sum(net.layers[l]);
    for (std::size_t l = 0; l < L; ++l) {
      double others = lambda;
      for (std::size_t j = 0; j < L; ++j) {
        if (j != l) others *= sums[j];
      }
      detail::add_path_gradient(net.layers[l], others, g.layers[l]);
    }
    return g;
  }

  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = net.layers[l];
    auto& gl = g.layers[l];
    switch (spec.kind) {
      case RegularizerKind::path_with_boundary:
        detail::add_path_gradient(layer, lambda, gl);
        detail::add_boundary_gradient(layer, lambda, gl);
        break;
      case RegularizerKind::weight_decay_with_boundary:
        detail::add_weight_decay_gradient(layer, lambda, gl);
        detail::add_boundary_gradient(layer, lambda, gl);
        break;
      case RegularizerKind::path_with_skip_l1:
        detail::add_path_gradient(layer, lambda, gl);
        detail::add_skip_l1_gradient(layer, lambda, gl);
        break;
      case RegularizerKind::weight_decay_with_skip_l1:
        detail::add_weight_decay_gradient(layer, lambda, gl);
        detail::add_skip_l1_gradient(layer, lambda, gl);
        break;
      case RegularizerKind::sum_of_path:
        detail::add_path_gradient(layer, lambda, gl);
        break;
      case RegularizerKind::sum_of_squares:
        detail::add_weight_decay_gradient(layer, lambda, gl);
        break;
      case RegularizerKind::product_of_paths:
        break;
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

inline std::vector<std::size_t> layer_dims_for(const Dataset& data, const TrainConfig& config) {
  std::vector<std::size_t> dims{data.input_dim()};
  for (std::size_t l = 0; l + 1 < config.widths.size(); ++l) {
    dims.push_back(config.hidden_dims.empty() ? data.input_dim() : config.hidden_dims[l]);
  }
  dims.push_back(data.target_dim());
  return dims;
}

inline TrainReport make_report(const DeepNet& net, const Dataset& data, const TrainConfig& config,
                               std::vector<double> objectives) {
  TrainReport report;
  report.objectives = std::move(objectives);
  report.final_data_loss = loss_value(net, data, config.loss);
  report.final_regularizer = regularizer_value(net, config.regularizer);
  report.active_neurons = active_neuron_counts(net, config.prune_eps);
  report.path_core = sum_of_path(net);
  report.weight_decay_core = sum_of_squares(net);
  return report;
}

inline std::pair<DeepNet, TrainReport> train(const Dataset& data, const TrainConfig& config) {
  data.validate();
  config.validate();

  DeepNet net = random_init(layer_dims_for(data, config), config.widths, config.seed, config.init_scale);

  std::vector<double> objectives;
  objectives.reserve(config.epochs + 1);
  objectives.push_back(objective_value(net, data, config.regularizer, config.loss));
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const DeepNet g = gradient(net, data, config.regularizer, config.loss);
    axpy(net, -config.step_size, g);
    if (config.rebalance_every > 0 && (epoch + 1) % config.rebalance_every == 0) {
      net = balance_net(net);
    }
    objectives.push_back(objective_value(net, data, config.regularizer, config.loss));
  }

  net = prune(net, config.prune_eps);
  TrainReport report = make_report(net, data, config, std::move(objectives));
  return {std::move(net), std::move(report)};
}

struct SweepRow {
  double lambda = 0.0;
  double final_data_loss = 0.0;
  double final_regularizer = 0.0;
  std::vector<std::size_t> active_neurons;
  double path_core = 0.0;
  double weight_decay_core = 0.0;

  std::size_t total_active() const {
    std::size_t n = 0;
    for (auto c : active_neurons) n += c;
    return n;
  }
};

/// One train() run per λ with everything else taken from `base`.
inline std::vector<SweepRow> sparsity_sweep(const Dataset& data, const TrainConfig& base,
                                            const std::vector<double>& lambdas) {
  if (lambdas.empty()) throw ValidationError("sparsity_sweep: lambda list is empty");
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    TrainConfig config = base;
    config.regularizer.lambda = lambda;
    const auto [net, report] = train(data, config);
    rows.push_back({lambda, report.final_data_loss, report.final_regularizer, report.active_neurons,
                    report.path_core, report.weight_decay_core});
  }
  return rows;
}

}  // namespace deepridge
