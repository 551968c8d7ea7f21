#pragma once

// Function-preserving per-neuron reparameterizations. Both rely on
// ρ(αt) = αρ(t) for α > 0, so scaling (v_k, w_k, b_k) to (αv_k, w_k/α, b_k/α)
// leaves the layer's function unchanged.

#include "deepridge/network.hpp"

namespace deepridge {

namespace detail {

inline void scale_neuron(BottleneckLayer& layer, std::size_t k, double alpha) {
  for (std::size_t m = 0; m < layer.out_dim(); ++m) layer.V(m, k) *= alpha;
  for (double& w : layer.W.row(k)) w /= alpha;
  layer.b[k] /= alpha;
}

}  // namespace detail

/// Rescales every neuron with w_k ≠ 0 so that ‖w_k‖₂ = 1.
inline BottleneckLayer normalize_directions(const BottleneckLayer& layer) {
  BottleneckLayer out = layer;
  for (std::size_t k = 0; k < out.width(); ++k) {
    const double norm = l2_norm(out.W.row(k));
    if (norm > 0.0 && norm != 1.0) detail::scale_neuron(out, k, norm);
  }
  return out;
}

inline DeepNet normalize_directions(const DeepNet& net) {
  DeepNet out;
  for (const auto& layer : net.layers) out.layers.push_back(normalize_directions(layer));
  return out;
}

/// Rescales every non-degenerate neuron so that ‖v_k‖₁ = ‖w_k‖₂. This is the
/// minimizer of ‖v_k‖₁² + ‖w_k‖₂² over the rescaling orbit, so it never
/// increases the weight-decay regularizer. Neurons with v_k = 0 or w_k = 0 are
/// left alone.
inline BottleneckLayer balance_layer(const BottleneckLayer& layer) {
  BottleneckLayer out = layer;
  for (std::size_t k = 0; k < out.width(); ++k) {
    const double v_norm = column_l1(out.V, k);
    const double w_norm = l2_norm(out.W.row(k));
    if (v_norm == 0.0 || w_norm == 0.0 || v_norm == w_norm) continue;
    detail::scale_neuron(out, k, std::sqrt(w_norm / v_norm));
  }
  return out;
}

inline DeepNet balance_net(const DeepNet& net) {
  DeepNet out;
  for (const auto& layer : net.layers) out.layers.push_back(balance_layer(layer));
  return out;
}

}  // namespace deepridge
