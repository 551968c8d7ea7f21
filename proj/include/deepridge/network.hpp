#pragma once

// Bottleneck-with-skip ReLU architecture:
//
//   x⁽⁰⁾ = x
//   x⁽ˡ⁾ = V⁽ˡ⁾ ρ(W⁽ˡ⁾ x⁽ˡ⁻¹⁾ − b⁽ˡ⁾) + C⁽ˡ⁾ x⁽ˡ⁻¹⁾ + c0⁽ˡ⁾,   ℓ = 1..L
//
// with ρ = max{0, ·}. Neuron k of a layer owns column v_k of V, row w_k of W
// and offset b_k.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "deepridge/numeric.hpp"

namespace deepridge {

struct BottleneckLayer {
  Matrix V;   // out × K
  Matrix W;   // K × in
  Vector b;   // K
  Matrix C;   // out × in
  Vector c0;  // out

  /// All-zero layer with the given shape.
  static BottleneckLayer zeros(std::size_t in, std::size_t out, std::size_t width) {
    return {Matrix(out, width), Matrix(width, in), Vector(width, 0.0), Matrix(out, in),
            Vector(out, 0.0)};
  }

  std::size_t in_dim() const { return C.cols(); }
  std::size_t out_dim() const { return C.rows(); }
  std::size_t width() const { return b.size(); }

  /// ‖v_k‖₁ · ‖w_k‖₂, the path weight carried by neuron k.
  double neuron_strength(std::size_t k) const { return column_l1(V, k) * l2_norm(W.row(k)); }

  void validate() const {
    const std::size_t K = width();
    const auto shape = [](const Matrix& m) {
      return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
    };
    if (V.rows() != out_dim() || V.cols() != K) {
      throw ValidationError("V is " + shape(V) + ", expected " + std::to_string(out_dim()) + "x" +
                            std::to_string(K));
    }
    if (W.rows() != K || W.cols() != in_dim()) {
      throw ValidationError("W is " + shape(W) + ", expected " + std::to_string(K) + "x" +
                            std::to_string(in_dim()));
    }
    if (c0.size() != out_dim()) {
      throw ValidationError("c0 has " + std::to_string(c0.size()) + " entries, expected " +
                            std::to_string(out_dim()));
    }
  }

  bool operator==(const BottleneckLayer&) const = default;
};

/// Ordered composition of bottleneck layers; layer ℓ maps ℝ^{d_{ℓ−1}} → ℝ^{d_ℓ}.
struct DeepNet {
  std::vector<BottleneckLayer> layers;

  std::size_t depth() const { return layers.size(); }
  std::size_t in_dim() const { return layers.front().in_dim(); }
  std::size_t out_dim() const { return layers.back().out_dim(); }

  /// d_0, …, d_L.
  std::vector<std::size_t> dims() const {
    std::vector<std::size_t> d;
    if (layers.empty()) return d;
    d.push_back(layers.front().in_dim());
    for (const auto& layer : layers) d.push_back(layer.out_dim());
    return d;
  }

  std::vector<std::size_t> widths() const {
    std::vector<std::size_t> w;
    for (const auto& layer : layers) w.push_back(layer.width());
    return w;
  }

  void validate() const {
    if (layers.empty()) throw ValidationError("network must have at least one layer");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      try {
        layers[l].validate();
      } catch (const ValidationError& e) {
        throw ValidationError("layer " + std::to_string(l + 1) + ": " + e.what());
      }
      if (l > 0 && layers[l].in_dim() != layers[l - 1].out_dim()) {
        throw ValidationError("layer " + std::to_string(l + 1) + " expects input dim " +
                              std::to_string(layers[l].in_dim()) + " but layer " +
                              std::to_string(l) + " outputs " +
                              std::to_string(layers[l - 1].out_dim()));
      }
    }
  }

  bool operator==(const DeepNet&) const = default;
};

/// Collapsed bias- and skip-free form: x̃⁽ˡ⁾ = ρ(A⁽ˡ⁻¹⁾ x̃⁽ˡ⁻¹⁾), s = A⁽ᴸ⁾ x̃⁽ᴸ⁾.
struct StandardNet {
  std::vector<Matrix> A;

  bool operator==(const StandardNet&) const = default;
};

inline Vector layer_forward(const BottleneckLayer& layer, std::span<const double> x) {
  if (x.size() != layer.in_dim()) {
    throw ValidationError("layer input has " + std::to_string(x.size()) + " entries, expected " +
                          std::to_string(layer.in_dim()));
  }
  Vector hidden = matvec(layer.W, x);
  for (std::size_t k = 0; k < hidden.size(); ++k) hidden[k] = relu(hidden[k] - layer.b[k]);
  Vector y = matvec(layer.V, hidden);
  const Vector skip = matvec(layer.C, x);
  for (std::size_t m = 0; m < y.size(); ++m) y[m] += skip[m] + layer.c0[m];
  return y;
}

inline Vector forward(const DeepNet& net, std::span<const double> x) {
  if (net.layers.empty()) throw ValidationError("forward: empty network");
  Vector h(x.begin(), x.end());
  for (const auto& layer : net.layers) h = layer_forward(layer, h);
  return h;
}

inline bool is_bias_skip_free(const DeepNet& net) {
  for (const auto& layer : net.layers) {
    if (!all_zero(layer.b) || !all_zero(layer.C.data()) || !all_zero(layer.c0)) return false;
  }
  return true;
}

/// A⁽⁰⁾ = W⁽¹⁾, A⁽ˡ⁾ = W⁽ˡ⁺¹⁾V⁽ˡ⁾ for ℓ = 1..L−1, A⁽ᴸ⁾ = V⁽ᴸ⁾.
/// Refuses nets with any nonzero bias, skip matrix or skip offset.
inline StandardNet collapse_to_standard(const DeepNet& net) {
  net.validate();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    const std::string where = "layer " + std::to_string(l + 1);
    if (!all_zero(layer.b)) throw ValidationError("collapse: " + where + " has nonzero biases");
    if (!all_zero(layer.C.data())) throw ValidationError("collapse: " + where + " has a nonzero skip matrix C");
    if (!all_zero(layer.c0)) throw ValidationError("collapse: " + where + " has a nonzero skip offset c0");
  }
  StandardNet out;
  out.A.push_back(net.layers.front().W);
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    out.A.push_back(matmul(net.layers[l + 1].W, net.layers[l].V));
  }
  out.A.push_back(net.layers.back().V);
  return out;
}

inline Vector standard_forward(const StandardNet& net, std::span<const double> x) {
  if (net.A.size() < 2) throw ValidationError("standard net needs at least two matrices");
  Vector h(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < net.A.size(); ++l) {
    h = matvec(net.A[l], h);
    for (double& v : h) v = relu(v);
  }
  return matvec(net.A.back(), h);
}

/// Upper bound on rank(A⁽ˡ⁾) implied by the bottleneck factorization:
/// min{d_0, K⁽¹⁾} for ℓ = 0, min{d_ℓ, K⁽ˡ⁾, K⁽ˡ⁺¹⁾} for interior ℓ, min{d_L, K⁽ᴸ⁾} for ℓ = L.
inline std::size_t collapsed_rank_bound(const DeepNet& net, std::size_t l) {
  const auto d = net.dims();
  const auto K = net.widths();
  const std::size_t L = net.depth();
  if (l == 0) return std::min(d[0], K[0]);
  if (l == L) return std::min(d[L], K[L - 1]);
  return std::min({d[l], K[l - 1], K[l]});
}

/// Drops every neuron with ‖v_k‖₁‖w_k‖₂ ≤ eps. A dropped neuron whose w_k is
/// exactly zero is a constant v_k ρ(−b_k); that constant moves into c0 so the
/// function is preserved. Other dropped neurons are discarded outright.
inline DeepNet prune(const DeepNet& net, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("prune: eps must be nonnegative");
  DeepNet out;
  out.layers.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    std::vector<std::size_t> keep;
    Vector c0 = layer.c0;
    for (std::size_t k = 0; k < layer.width(); ++k) {
      if (layer.neuron_strength(k) > eps) {
        keep.push_back(k);
        continue;
      }
      if (all_zero(layer.W.row(k))) {
        const double constant = relu(-layer.b[k]);
        for (std::size_t m = 0; m < c0.size(); ++m) c0[m] += layer.V(m, k) * constant;
      }
    }
    BottleneckLayer pruned = BottleneckLayer::zeros(layer.in_dim(), layer.out_dim(), keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
      const std::size_t k = keep[j];
      for (std::size_t m = 0; m < layer.out_dim(); ++m) pruned.V(m, j) = layer.V(m, k);
      for (std::size_t i = 0; i < layer.in_dim(); ++i) pruned.W(j, i) = layer.W(k, i);
      pruned.b[j] = layer.b[k];
    }
    pruned.C = layer.C;
    pruned.c0 = std::move(c0);
    out.layers.push_back(std::move(pruned));
  }
  return out;
}

/// Per-layer count of neurons with strength strictly above eps.
inline std::vector<std::size_t> active_neuron_counts(const DeepNet& net, double eps) {
  if (!(eps >= 0.0)) throw ValidationError("active_neuron_counts: eps must be nonnegative");
  std::vector<std::size_t> counts;
  for (const auto& layer : net.layers) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < layer.width(); ++k) n += layer.neuron_strength(k) > eps ? 1 : 0;
    counts.push_back(n);
  }
  return counts;
}

/// Random bottleneck net: unit-norm rows of W (normalized Gaussians), b uniform
/// in [−scale, scale], V Gaussian with standard deviation scale/√K, C = 0, c0 = 0.
/// `dims` lists d_0..d_L and `widths` lists K⁽¹⁾..K⁽ᴸ⁾.
inline DeepNet random_init(const std::vector<std::size_t>& dims,
                           const std::vector<std::size_t>& widths, std::uint64_t seed,
                           double scale) {
  if (dims.size() < 2) throw ValidationError("random_init: need at least d_0 and d_1");
  if (widths.size() + 1 != dims.size()) {
    throw ValidationError("random_init: " + std::to_string(widths.size()) + " widths for " +
                          std::to_string(dims.size() - 1) + " layers");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  DeepNet net;
  for (std::size_t l = 0; l < widths.size(); ++l) {
    const std::size_t in = dims[l], out = dims[l + 1], K = widths[l];
    BottleneckLayer layer = BottleneckLayer::zeros(in, out, K);
    for (std::size_t k = 0; k < K; ++k) {
      auto row = layer.W.row(k);
      double norm = 0.0;
      while (in > 0 && norm == 0.0) {
        for (double& w : row) w = gauss(rng);
        norm = l2_norm(row);
      }
      for (double& w : row) w /= norm;
    }
    for (double& bk : layer.b) bk = unit(rng) * scale;
    const double v_scale = K > 0 ? scale / std::sqrt(static_cast<double>(K)) : 0.0;
    for (double& v : layer.V.data()) v = gauss(rng) * v_scale;
    net.layers.push_back(std::move(layer));
  }
  return net;
}

}  // namespace deepridge
