#pragma once

// Radon-domain view of a shallow scalar ReLU network.
//
// With the boundary functionals φ_0 = δ, φ_k = δ(· − e_k) − δ and the affine
// basis p_0 = 1, p_k = x_k, every shallow network decomposes as
//
//   s(x) = Σ_atoms u_j g(x, w_j, b_j) + s(0) + Σ_k (s(e_k) − s(0)) x_k
//
// where g is the kernel below (ρ = |·|/2 version) and u_j = v_j‖w_j‖₂ sits at
// the unit direction w_j/‖w_j‖₂ with offset b_j/‖w_j‖₂. Because ReLU and |·|/2
// differ by an affine function, which g annihilates, the finite sum is exact.
// Measures are stored one-sided: one atom per neuron, evenness implied.

#include <string>
#include <utility>
#include <vector>

#include "deepridge/network.hpp"

namespace deepridge {

struct RadonAtom {
  double weight = 0.0;
  Vector direction;  // unit ℓ² norm
  double offset = 0.0;
};

struct DiscreteRadonMeasure {
  std::vector<RadonAtom> atoms;
  std::size_t dimension = 0;
};

/// Affine part recovered through the boundary functionals: f(0) and the
/// finite differences f(e_k) − f(0).
struct AffineBoundary {
  double value_at_origin = 0.0;
  Vector axis_deltas;
};

inline constexpr double kUnitDirectionTolerance = 1e-9;

/// g(x, (w, b)) = |wᵀx − b|/2 − (|b|/2)(1 − Σ_k x_k) − Σ_k x_k |w_k − b|/2.
inline double kernel_g_phi(std::span<const double> x, std::span<const double> w, double b) {
  if (x.size() != w.size()) throw ValidationError("kernel_g_phi: dimension mismatch");
  if (std::abs(l2_norm(w) - 1.0) > kUnitDirectionTolerance) {
    throw ValidationError("kernel_g_phi: direction is not unit norm");
  }
  double coord_sum = 0.0;
  double axis_terms = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    coord_sum += x[k];
    axis_terms += x[k] * std::abs(w[k] - b) / 2.0;
  }
  return std::abs(dot(w, x) - b) / 2.0 - std::abs(b) / 2.0 * (1.0 - coord_sum) - axis_terms;
}

/// Offsets [b_low, b_high] outside of which g(x, (w, ·)) vanishes. Only axes
/// with x_k ≠ 0 contribute a w_k breakpoint, so x = 0 gives [0, 0].
inline std::pair<double, double> support_bounds(std::span<const double> x,
                                                std::span<const double> w) {
  if (x.size() != w.size()) throw ValidationError("support_bounds: dimension mismatch");
  const double proj = dot(w, x);
  double lo = std::min(proj, 0.0);
  double hi = std::max(proj, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == 0.0) continue;
    lo = std::min(lo, w[k]);
    hi = std::max(hi, w[k]);
  }
  return {lo, hi};
}

/// Splits a scalar-output layer into its Radon-domain atoms and affine
/// boundary data. Neurons with w_k = 0 are constants and only show up in the
/// boundary data, which is read off actual evaluations of the layer.
inline std::pair<DiscreteRadonMeasure, AffineBoundary> extract_measure(
    const BottleneckLayer& layer) {
  layer.validate();
  if (layer.out_dim() != 1) {
    throw ValidationError("extract_measure: layer has " + std::to_string(layer.out_dim()) +
                          " outputs, expected 1");
  }
  const std::size_t d = layer.in_dim();
  DiscreteRadonMeasure measure;
  measure.dimension = d;
  for (std::size_t k = 0; k < layer.width(); ++k) {
    const auto w = layer.W.row(k);
    const double norm = l2_norm(w);
    if (norm == 0.0) continue;
    RadonAtom atom;
    atom.weight = layer.V(0, k) * norm;
    atom.direction.reserve(d);
    for (double wi : w) atom.direction.push_back(wi / norm);
    atom.offset = layer.b[k] / norm;
    measure.atoms.push_back(std::move(atom));
  }

  AffineBoundary boundary;
  Vector point(d, 0.0);
  boundary.value_at_origin = layer_forward(layer, point).front();
  boundary.axis_deltas.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    point[k] = 1.0;
    boundary.axis_deltas[k] = layer_forward(layer, point).front() - boundary.value_at_origin;
    point[k] = 0.0;
  }
  return {std::move(measure), std::move(boundary)};
}

inline std::pair<DiscreteRadonMeasure, AffineBoundary> extract_measure(const DeepNet& net) {
  if (net.depth() != 1) {
    throw ValidationError("extract_measure: network has " + std::to_string(net.depth()) +
                          " layers, expected a shallow (single-layer) network");
  }
  return extract_measure(net.layers.front());
}

/// ‖u‖ = Σ |atom weights|.
inline double measure_total_variation(const DiscreteRadonMeasure& measure) {
  double s = 0.0;
  for (const auto& atom : measure.atoms) s += std::abs(atom.weight);
  return s;
}

/// f(x) = Σ_atoms weight · g(x, direction, offset) + f(0) + Σ_k (f(e_k) − f(0)) x_k.
inline double reconstruct(const DiscreteRadonMeasure& measure, const AffineBoundary& boundary,
                          std::span<const double> x) {
  if (x.size() != measure.dimension || boundary.axis_deltas.size() != measure.dimension) {
    throw ValidationError("reconstruct: point has " + std::to_string(x.size()) +
                          " coordinates, measure dimension is " +
                          std::to_string(measure.dimension));
  }
  double s = 0.0;
  for (const auto& atom : measure.atoms) s += atom.weight * kernel_g_phi(x, atom.direction, atom.offset);
  s += boundary.value_at_origin;
  for (std::size_t k = 0; k < x.size(); ++k) s += boundary.axis_deltas[k] * x[k];
  return s;
}

}  // namespace deepridge
