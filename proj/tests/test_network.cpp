#include <random>

#include <gtest/gtest.h>

#include "deepridge/network.hpp"
#include "deepridge/rescale.hpp"
#include "test_support.hpp"

using namespace deepridge;
using namespace deepridge::testing;

namespace {

DeepNet single_relu() {
  // s(x) = ρ(x)
  return DeepNet{{BottleneckLayer{Matrix{{1}}, Matrix{{1}}, Vector{0}, Matrix{{0}}, Vector{0}}}};
}

}  // namespace

TEST(Forward, ZeroNetGivesZero) {
  const DeepNet net{{BottleneckLayer::zeros(3, 4, 5), BottleneckLayer::zeros(4, 2, 3)}};
  EXPECT_EQ(forward(net, Vector{1, -2, 3}), (Vector{0, 0}));
}

TEST(Forward, SingleRelu) {
  const DeepNet net = single_relu();
  EXPECT_EQ(forward(net, Vector{2}), (Vector{2}));
  EXPECT_EQ(forward(net, Vector{-2}), (Vector{0}));
}

TEST(Forward, PureSkipIsIdentity) {
  auto layer = BottleneckLayer::zeros(3, 3, 0);
  layer.C = Matrix::identity(3);
  const DeepNet net{{layer}};
  EXPECT_EQ(forward(net, Vector{1.5, -2, 7}), (Vector{1.5, -2, 7}));
}

TEST(Forward, DimensionMismatch) {
  EXPECT_THROW(forward(single_relu(), Vector{1, 2}), ValidationError);
}

TEST(Validate, CatchesInconsistentShapes) {
  auto layer = BottleneckLayer::zeros(2, 1, 3);
  layer.V = Matrix(1, 2);
  EXPECT_THROW(DeepNet{{layer}}.validate(), ValidationError);
  EXPECT_THROW(DeepNet{}.validate(), ValidationError);
  const DeepNet chain{{BottleneckLayer::zeros(2, 3, 1), BottleneckLayer::zeros(2, 1, 1)}};
  EXPECT_THROW(chain.validate(), ValidationError);
}

TEST(Collapse, SingleLayerReturnsFactors) {
  auto layer = BottleneckLayer::zeros(2, 1, 2);
  layer.W = Matrix{{1, 2}, {3, 4}};
  layer.V = Matrix{{5, 6}};
  const StandardNet s = collapse_to_standard(DeepNet{{layer}});
  ASSERT_EQ(s.A.size(), 2u);
  EXPECT_EQ(s.A[0], layer.W);
  EXPECT_EQ(s.A[1], layer.V);
}

TEST(Collapse, TwoLayerInteriorProduct) {
  auto l1 = BottleneckLayer::zeros(1, 2, 1);
  l1.W = Matrix{{1}};
  l1.V = Matrix{{1}, {1}};
  auto l2 = BottleneckLayer::zeros(2, 1, 1);
  l2.W = Matrix{{1, 1}};
  l2.V = Matrix{{1}};
  const StandardNet s = collapse_to_standard(DeepNet{{l1, l2}});
  ASSERT_EQ(s.A.size(), 3u);
  EXPECT_EQ(s.A[1], (Matrix{{2}}));
}

TEST(Collapse, RefusesBiasesAndSkips) {
  DeepNet net = single_relu();
  net.layers[0].b[0] = 0.5;
  EXPECT_THROW(collapse_to_standard(net), ValidationError);
  net = single_relu();
  net.layers[0].C(0, 0) = 1.0;
  EXPECT_THROW(collapse_to_standard(net), ValidationError);
  net = single_relu();
  net.layers[0].c0[0] = -1.0;
  EXPECT_THROW(collapse_to_standard(net), ValidationError);
}

TEST(StandardForward, Examples) {
  EXPECT_EQ(standard_forward(StandardNet{{Matrix(2, 3), Matrix(1, 2)}}, Vector{1, 2, 3}), (Vector{0}));
  EXPECT_EQ(standard_forward(StandardNet{{Matrix{{1}}, Matrix{{1}}}}, Vector{3}), (Vector{3}));
}

TEST(StandardForward, AgreesWithBottleneckForward) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const DeepNet net = random_net(rng, random_shape(rng, 4, 5, 6), {.biases = false, .skips = false});
    const StandardNet s = collapse_to_standard(net);
    for (int i = 0; i < 100; ++i) {
      const Vector x = random_point(rng, net.in_dim());
      EXPECT_LT(max_abs_diff(standard_forward(s, x), forward(net, x)), 1e-9);
    }
    for (std::size_t l = 0; l < s.A.size(); ++l) {
      EXPECT_LE(numerical_rank(s.A[l]), collapsed_rank_bound(net, l));
    }
  }
}

TEST(Homogeneity, PerNeuronRescaleKeepsFunction) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> alpha(0.1, 10.0);
  for (int trial = 0; trial < 30; ++trial) {
    const DeepNet net = random_net(rng, random_shape(rng, 3, 4, 6));
    DeepNet scaled = net;
    for (auto& layer : scaled.layers) {
      for (std::size_t k = 0; k < layer.width(); ++k) {
        const double a = alpha(rng);
        for (std::size_t m = 0; m < layer.out_dim(); ++m) layer.V(m, k) *= a;
        for (double& w : layer.W.row(k)) w /= a;
        layer.b[k] /= a;
      }
    }
    for (int i = 0; i < 50; ++i) {
      const Vector x = random_point(rng, net.in_dim());
      const Vector fx = forward(net, x);
      EXPECT_LT(max_abs_diff(forward(scaled, x), fx), 1e-12 * (1.0 + max_abs(fx)));
    }
  }
}

TEST(Prune, ZeroEpsKeepsLiveNeurons) {
  std::mt19937_64 rng(8);
  const DeepNet net = random_net(rng, {{2, 3, 1}, {4, 5}});
  EXPECT_EQ(prune(net, 0.0), net);
}

TEST(Prune, DropsZeroCoefficientNeuron) {
  std::mt19937_64 rng(9);
  DeepNet net = random_net(rng, {{2, 1}, {3}});
  net.layers[0].V(0, 1) = 0.0;
  const DeepNet pruned = prune(net, 0.0);
  EXPECT_EQ(pruned.layers[0].width(), 2u);
  for (int i = 0; i < 50; ++i) {
    const Vector x = random_point(rng, 2);
    EXPECT_EQ(forward(pruned, x), forward(net, x));
  }
}

TEST(Prune, FoldsConstantNeuronIntoOffset) {
  DeepNet net = single_relu();
  auto& layer = net.layers[0];
  layer = BottleneckLayer::zeros(1, 1, 2);
  layer.V = Matrix{{1, 3}};
  layer.W = Matrix{{1}, {0}};
  layer.b = {0, -2};  // neuron 2 is the constant 3·ρ(2) = 6
  const DeepNet pruned = prune(net, 0.0);
  ASSERT_EQ(pruned.layers[0].width(), 1u);
  EXPECT_EQ(pruned.layers[0].c0[0], 6.0);
  for (double x : {-1.0, 0.0, 2.5}) EXPECT_EQ(forward(pruned, Vector{x}), forward(net, Vector{x}));
  EXPECT_EQ(prune(pruned, 0.0), pruned);
}

TEST(Prune, ThresholdComparison) {
  DeepNet net = single_relu();
  net.layers[0].V(0, 0) = 1e-12;
  EXPECT_EQ(prune(net, 1e-9).layers[0].width(), 0u);
  EXPECT_EQ(prune(net, 1e-13).layers[0].width(), 1u);
  EXPECT_THROW(prune(net, -1.0), ValidationError);
}

TEST(ActiveCounts, Examples) {
  const DeepNet zero{{BottleneckLayer::zeros(2, 2, 4), BottleneckLayer::zeros(2, 1, 3)}};
  EXPECT_EQ(active_neuron_counts(zero, 0.0), (std::vector<std::size_t>{0, 0}));

  DeepNet net = single_relu();
  net.layers[0] = BottleneckLayer::zeros(1, 1, 3);
  net.layers[0].V = Matrix{{1, 1e-12, 2}};
  net.layers[0].W = Matrix{{1}, {1}, {1}};
  const auto before = active_neuron_counts(net, 1e-9);
  EXPECT_EQ(before, (std::vector<std::size_t>{2}));
  EXPECT_EQ(prune(net, 1e-9).layers[0].width(), before[0]);
  EXPECT_EQ(active_neuron_counts(net, -0.0), (std::vector<std::size_t>{3}));
}

TEST(RandomInit, DeterministicBySeed) {
  const auto a = random_init({3, 2, 1}, {5, 4}, 42, 1.0);
  const auto b = random_init({3, 2, 1}, {5, 4}, 42, 1.0);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, random_init({3, 2, 1}, {5, 4}, 43, 1.0));
  for (const auto& layer : a.layers) {
    for (std::size_t k = 0; k < layer.width(); ++k) EXPECT_NEAR(l2_norm(layer.W.row(k)), 1.0, 1e-15);
    for (double bk : layer.b) {
      EXPECT_GE(bk, -1.0);
      EXPECT_LE(bk, 1.0);
    }
    EXPECT_TRUE(all_zero(layer.C.data()));
    EXPECT_TRUE(all_zero(layer.c0));
  }
}

TEST(RandomInit, ZeroScale) {
  const auto net = random_init({2, 1}, {6}, 1, 0.0);
  EXPECT_TRUE(all_zero(net.layers[0].V.data()));
  EXPECT_TRUE(all_zero(net.layers[0].b));
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(l2_norm(net.layers[0].W.row(k)), 1.0, 1e-15);
}

TEST(RandomInit, ZeroWidthLayersAreZeroMaps) {
  const auto net = random_init({2, 3, 1}, {0, 0}, 1, 1.0);
  EXPECT_EQ(net.widths(), (std::vector<std::size_t>{0, 0}));
  EXPECT_EQ(forward(net, Vector{4, -1}), (Vector{0}));
  EXPECT_THROW(random_init({2, 1}, {1, 2}, 0, 1.0), ValidationError);
}
