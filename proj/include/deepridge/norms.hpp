#pragma once

// Norms, seminorms, regularizers and Lipschitz bounds expressed directly in
// network parameters. None of these require unit-norm directions w_k.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "deepridge/network.hpp"

namespace deepridge {

// ---------------------------------------------------------------------------
// Per-layer quantities
// ---------------------------------------------------------------------------

/// Σ_k ‖v_k‖₁ ‖w_k‖₂.
inline double layer_path_sum(const BottleneckLayer& layer) {
  double s = 0.0;
  for (std::size_t k = 0; k < layer.width(); ++k) s += layer.neuron_strength(k);
  return s;
}

/// (‖V‖²₁,₂ + ‖W‖²_F) / 2.
inline double layer_weight_decay(const BottleneckLayer& layer) {
  return 0.5 * (mixed_l1l2_squared(layer.V) + frobenius_norm_squared(layer.W));
}

/// Σ_m ( |s_m(0)| + Σ_n |s_m(e_n) − s_m(0)| ), with s evaluated on the layer's
/// own input space. Includes the constant contributions v_k ρ(−b_k) of the
/// neurons, so it generally differs from ‖C‖₁,₁ + ‖c0‖₁.
inline double layer_boundary_term(const BottleneckLayer& layer) {
  const std::size_t d = layer.in_dim();
  Vector point(d, 0.0);
  const Vector at_origin = layer_forward(layer, point);
  double s = l1_norm(at_origin);
  for (std::size_t n = 0; n < d; ++n) {
    point[n] = 1.0;
    const Vector at_axis = layer_forward(layer, point);
    point[n] = 0.0;
    for (std::size_t m = 0; m < at_axis.size(); ++m) s += std::abs(at_axis[m] - at_origin[m]);
  }
  return s;
}

/// ‖C‖₁,₁ + ‖c0‖₁.
inline double layer_skip_l1(const BottleneckLayer& layer) {
  return mixed_l1l1(layer.C) + l1_norm(layer.c0);
}

/// Second-order Radon-domain total variation of a scalar-output layer:
/// Σ_k |v_k| ‖w_k‖₂.
inline double rtv2_shallow(const BottleneckLayer& layer) {
  if (layer.out_dim() != 1) {
    throw ValidationError("rtv2_shallow: layer has " + std::to_string(layer.out_dim()) +
                          " outputs, expected 1");
  }
  return layer_path_sum(layer);
}

/// RTV²(s) + |s(0)| + Σ_n |s(e_n) − s(0)| for a scalar-output layer.
inline double rbv2_norm_scalar(const BottleneckLayer& layer) {
  return rtv2_shallow(layer) + layer_boundary_term(layer);
}

/// Vector-valued version: Σ_k ‖v_k‖₁‖w_k‖₂ plus the boundary term summed over outputs.
inline double rbv2_norm_vector(const BottleneckLayer& layer) {
  return layer_path_sum(layer) + layer_boundary_term(layer);
}

// ---------------------------------------------------------------------------
// Whole-network quantities
// ---------------------------------------------------------------------------

inline double deep_compositional_norm(const DeepNet& net) {
  double s = 0.0;
  for (const auto& layer : net.layers) s += rbv2_norm_vector(layer);
  return s;
}

/// Π_ℓ ‖s⁽ˡ⁾‖, a Lipschitz constant of the network in the ℓ¹ → ℓ¹ metric.
inline double lipschitz_bound(const DeepNet& net) {
  double p = 1.0;
  for (const auto& layer : net.layers) p *= rbv2_norm_vector(layer);
  return p;
}

/// max over sampled pairs of ‖f(x) − f(y)‖₁ / ‖x − y‖₁ with x, y uniform in
/// [−radius, radius]^{d_0}. Coincident pairs are redrawn.
inline double empirical_lipschitz(const DeepNet& net, std::size_t n_pairs, std::uint64_t seed,
                                  double radius) {
  if (n_pairs < 1) throw ValidationError("empirical_lipschitz: n_pairs must be at least 1");
  net.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(-radius, radius);
  const std::size_t d = net.in_dim();
  Vector x(d), y(d), diff(d);
  double best = 0.0;
  for (std::size_t i = 0; i < n_pairs; ++i) {
    double dist = 0.0;
    for (int attempt = 0; dist == 0.0 && attempt < 64; ++attempt) {
      for (std::size_t j = 0; j < d; ++j) {
        x[j] = coord(rng);
        y[j] = coord(rng);
        diff[j] = x[j] - y[j];
      }
      dist = l1_norm(diff);
    }
    if (dist == 0.0) continue;
    const Vector fx = forward(net, x);
    const Vector fy = forward(net, y);
    double num = 0.0;
    for (std::size_t m = 0; m < fx.size(); ++m) num += std::abs(fx[m] - fy[m]);
    best = std::max(best, num / dist);
  }
  return best;
}

/// Σ_ℓ Σ_k ‖v_k⁽ˡ⁾‖₁ ‖w_k⁽ˡ⁾‖₂.
inline double sum_of_path(const DeepNet& net) {
  double s = 0.0;
  for (const auto& layer : net.layers) s += layer_path_sum(layer);
  return s;
}

/// ½ Σ_ℓ (‖V⁽ˡ⁾‖²₁,₂ + ‖W⁽ˡ⁾‖²_F).
inline double sum_of_squares(const DeepNet& net) {
  double s = 0.0;
  for (const auto& layer : net.layers) s += layer_weight_decay(layer);
  return s;
}

/// Π_ℓ Σ_k ‖v_k⁽ˡ⁾‖₁ ‖w_k⁽ˡ⁾‖₂.
inline double product_of_paths(const DeepNet& net) {
  double p = 1.0;
  for (const auto& layer : net.layers) p *= layer_path_sum(layer);
  return p;
}

/// Classic path norm Σ_paths Π |a| of a scalar-output standard net, evaluated
/// as |A⁽ᴸ⁾| |A⁽ᴸ⁻¹⁾| ⋯ |A⁽⁰⁾| 𝟙 instead of enumerating paths.
inline double classic_path_norm(const StandardNet& net) {
  if (net.A.size() < 2) throw ValidationError("classic_path_norm: need at least two matrices");
  if (net.A.back().rows() != 1) {
    throw ValidationError("classic_path_norm: output matrix has " +
                          std::to_string(net.A.back().rows()) + " rows, expected 1");
  }
  Vector acc(net.A.front().cols(), 1.0);
  for (const auto& a : net.A) acc = matvec(abs_entries(a), acc);
  return acc.front();
}

/// Hybrid path sum Σ_paths ‖w_{k1}⁽¹⁾‖₂ |a_{k1,k2}| ⋯ |a_{k_{L−1},k_L}| ‖v_{kL}⁽ᴸ⁾‖₁
/// with interior entries from A⁽ˡ⁾ = W⁽ˡ⁺¹⁾V⁽ˡ⁾. Only V and W enter; biases and
/// skips are ignored.
inline double mixed_path_lower_bound(const DeepNet& net) {
  net.validate();
  const auto& first = net.layers.front();
  Vector acc(first.width());
  for (std::size_t k = 0; k < first.width(); ++k) acc[k] = l2_norm(first.W.row(k));
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    acc = matvec(abs_entries(matmul(net.layers[l + 1].W, net.layers[l].V)), acc);
  }
  const auto& last = net.layers.back();
  double s = 0.0;
  for (std::size_t k = 0; k < last.width(); ++k) s += column_l1(last.V, k) * acc[k];
  return s;
}

// ---------------------------------------------------------------------------
// Regularizers
// ---------------------------------------------------------------------------

enum class RegularizerKind {
  path_with_boundary,
  weight_decay_with_boundary,
  path_with_skip_l1,
  weight_decay_with_skip_l1,
  sum_of_path,
  sum_of_squares,
  product_of_paths,
};

inline constexpr RegularizerKind kAllRegularizerKinds[] = {
    RegularizerKind::path_with_boundary,  RegularizerKind::weight_decay_with_boundary,
    RegularizerKind::path_with_skip_l1,   RegularizerKind::weight_decay_with_skip_l1,
    RegularizerKind::sum_of_path,         RegularizerKind::sum_of_squares,
    RegularizerKind::product_of_paths,
};

inline std::string_view to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::path_with_boundary: return "path_with_boundary";
    case RegularizerKind::weight_decay_with_boundary: return "weight_decay_with_boundary";
    case RegularizerKind::path_with_skip_l1: return "path_with_skip_l1";
    case RegularizerKind::weight_decay_with_skip_l1: return "weight_decay_with_skip_l1";
    case RegularizerKind::sum_of_path: return "sum_of_path";
    case RegularizerKind::sum_of_squares: return "sum_of_squares";
    case RegularizerKind::product_of_paths: return "product_of_paths";
  }
  throw ValidationError("unknown regularizer kind");
}

inline RegularizerKind parse_regularizer_kind(std::string_view name) {
  for (auto kind : kAllRegularizerKinds) {
    if (to_string(kind) == name) return kind;
  }
  throw ValidationError("unknown regularizer kind '" + std::string(name) + "'");
}

struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::weight_decay_with_boundary;
  double lambda = 0.0;

  void validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw ValidationError("regularizer lambda must be finite and nonnegative");
    }
  }
};

/// The selected functional without the λ factor.
inline double regularizer_core(const DeepNet& net, RegularizerKind kind) {
  double s = 0.0;
  switch (kind) {
    case RegularizerKind::path_with_boundary:
      for (const auto& layer : net.layers) s += layer_path_sum(layer) + layer_boundary_term(layer);
      return s;
    case RegularizerKind::weight_decay_with_boundary:
      for (const auto& layer : net.layers) s += layer_weight_decay(layer) + layer_boundary_term(layer);
      return s;
    case RegularizerKind::path_with_skip_l1:
      for (const auto& layer : net.layers) s += layer_path_sum(layer) + layer_skip_l1(layer);
      return s;
    case RegularizerKind::weight_decay_with_skip_l1:
      for (const auto& layer : net.layers) s += layer_weight_decay(layer) + layer_skip_l1(layer);
      return s;
    case RegularizerKind::sum_of_path: return sum_of_path(net);
    case RegularizerKind::sum_of_squares: return sum_of_squares(net);
    case RegularizerKind::product_of_paths: return product_of_paths(net);
  }
  throw ValidationError("unknown regularizer kind");
}

inline double regularizer_value(const DeepNet& net, const RegularizerSpec& spec) {
  spec.validate();
  if (spec.lambda == 0.0) return 0.0;
  return spec.lambda * regularizer_core(net, spec.kind);
}

}  // namespace deepridge
