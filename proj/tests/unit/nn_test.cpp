#include <gtest/gtest.h>

#include <cmath>

#include "scenezsl/nn/checkpoint.hpp"
#include "scenezsl/nn/graph.hpp"
#include "scenezsl/nn/model.hpp"
#include "scenezsl/nn/tensor.hpp"
#include "test_support.hpp"

namespace scenezsl::nn {
namespace {

using testing::random_cloud;
using TensorD = BasicTensor<double>;

TensorD random_tensor(Shape shape, std::uint64_t seed) {
  TensorD t(std::move(shape));
  Philox rng(seed);
  for (auto& x : t.storage()) x = rng.uniform(-1.0, 1.0);
  return t;
}

ModelConfig toy_config() {
  ModelConfig c;
  c.encoder_widths = {3, 8, 16};
  c.point_hidden = 12;
  c.text_dim = 5;
  c.text_hidden1 = 10;
  c.text_hidden2 = 9;
  c.embed_dim = 6;
  return c;
}

TEST(Tensor, ShapeChecked) {
  EXPECT_THROW(Tensor(Shape{2, 3}, std::vector<float>(5)), NnError);
  Tensor t(Shape{2, 3}, 1.5f);
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t.size(), 6u);
}

TEST(Tensor, MatmulVariantsAgree) {
  const TensorD a = random_tensor({4, 3}, 1);
  const TensorD b = random_tensor({3, 5}, 2);
  const TensorD c = matmul(a, b);
  ASSERT_EQ(c.shape(), (Shape{4, 5}));
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 3; ++k) s += a.at(i, k) * b.at(k, j);
      EXPECT_NEAR(c.at(i, j), s, 1e-15);
    }
  }
  const TensorD at = transpose(a);
  EXPECT_EQ(matmul_tn(at, b), c);
  EXPECT_EQ(matmul_nt(a, transpose(b)), c);
  EXPECT_THROW(matmul(a, a), NnError);
  const TensorD sums = column_sums(a);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(sums[j], a.at(0, j) + a.at(1, j) + a.at(2, j) + a.at(3, j), 1e-15);
  }
}

TEST(Graph, LinearLayerGradient) {
  // loss = sum(x w + b): dL/dw[k][n] = sum_m x[m][k], dL/db = m.
  Graph<double> g;
  const TensorD x = random_tensor({5, 3}, 3);
  const Var xv = g.constant(x);
  const Var w = g.leaf(random_tensor({3, 2}, 4));
  const Var b = g.leaf(TensorD(Shape{2}, 0.0));
  const Var y = g.dense(xv, w, b);
  g.backward(y, TensorD(Shape{5, 2}, 1.0));
  const TensorD gw = g.grad(w);
  for (std::size_t k = 0; k < 3; ++k) {
    double s = 0.0;
    for (std::size_t m = 0; m < 5; ++m) s += x.at(m, k);
    EXPECT_NEAR(gw.at(k, 0), s, 1e-14);
    EXPECT_NEAR(gw.at(k, 1), s, 1e-14);
  }
  EXPECT_EQ(g.grad(b)[0], 5.0);
  EXPECT_EQ(g.grad(xv), TensorD(Shape{5, 3}, 0.0));
}

TEST(Graph, UnusedLeafHasZeroGradient) {
  Graph<double> g;
  const Var a = g.leaf(random_tensor({1, 3}, 5));
  const Var unused = g.leaf(random_tensor({3, 3}, 6));
  const Var w = g.leaf(random_tensor({3, 1}, 7));
  const Var b = g.leaf(TensorD(Shape{1}, 0.0));
  const Var y = g.dense(a, w, b);
  g.backward(y);
  EXPECT_EQ(g.grad(unused), TensorD(Shape{3, 3}, 0.0));
}

TEST(Graph, MaxPoolRoutesToFirstArgmax) {
  Graph<double> g;
  const Var x = g.leaf(TensorD(Shape{3, 2}, std::vector<double>{1, 5, 4, 5, 4, 2}));
  const Var m = g.max_over_rows(x);
  EXPECT_EQ(g.value(m), TensorD(Shape{1, 2}, std::vector<double>{4, 5}));
  g.backward(m, TensorD(Shape{1, 2}, std::vector<double>{10, 20}));
  EXPECT_EQ(g.grad(x), TensorD(Shape{3, 2}, std::vector<double>{0, 20, 10, 0, 0, 0}));
}

TEST(Graph, StackAndCustomFiniteDifference) {
  // f(a, b) = sum(relu(stack(a, b) w + c)^2) via a custom square node.
  const TensorD a0 = random_tensor({1, 4}, 8), b0 = random_tensor({1, 4}, 9);
  const TensorD w0 = random_tensor({4, 3}, 10), c0 = random_tensor({3}, 11);
  const auto run = [&](const TensorD& a, const TensorD& b, const TensorD& w, TensorD* grad_w) {
    Graph<double> g;
    const Var av = g.leaf(a), bv = g.leaf(b), wv = g.leaf(w), cv = g.leaf(c0);
    const Var rows[] = {av, bv};
    const Var h = g.relu(g.dense(g.stack_rows(rows), wv, cv));
    double total = 0.0;
    for (double v : g.value(h).storage()) total += v * v;
    const Var out = g.custom(TensorD(Shape{1}, total), {h}, [h](Graph<double>& gr, const TensorD& seed) {
      TensorD d = gr.value(h);
      for (auto& v : d.storage()) v *= 2.0 * seed[0];
      gr.accumulate(h, d);
    });
    if (grad_w) {
      g.backward(out);
      *grad_w = g.grad(wv);
    }
    return total;
  };
  TensorD gw;
  run(a0, b0, w0, &gw);
  const double h = 1e-6;
  for (std::size_t i = 0; i < w0.size(); ++i) {
    TensorD wp = w0, wm = w0;
    wp[i] += h;
    wm[i] -= h;
    const double fd = (run(a0, b0, wp, nullptr) - run(a0, b0, wm, nullptr)) / (2 * h);
    EXPECT_NEAR(gw[i], fd, 1e-7 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Model, ParameterShapes) {
  const auto p = ModelParams::kaiming(ModelConfig{}, 1);
  ASSERT_EQ(p.encoder.size(), 3u);
  EXPECT_EQ(p.encoder[2].weight.shape(), (Shape{128, 1024}));
  EXPECT_EQ(p.point_head[0].weight.shape(), (Shape{1024, 512}));
  EXPECT_EQ(p.point_head[1].weight.shape(), (Shape{512, 128}));
  EXPECT_EQ(p.text_head[0].weight.shape(), (Shape{768, 1024}));
  EXPECT_EQ(p.text_head[1].weight.shape(), (Shape{1024, 512}));
  EXPECT_EQ(p.text_head[2].weight.shape(), (Shape{512, 128}));
  EXPECT_EQ(p.named().front().first, "encoder.0.weight");
  EXPECT_TRUE(p.all_finite());
}

TEST(Model, KaimingBoundsAndDeterminism) {
  const auto cfg = toy_config();
  const auto a = ModelParams::kaiming(cfg, 3);
  EXPECT_EQ(a, ModelParams::kaiming(cfg, 3));
  EXPECT_NE(a, ModelParams::kaiming(cfg, 4));
  for (const auto& [name, t] : a.named()) {
    if (name.ends_with("bias")) {
      for (float v : t->storage()) EXPECT_EQ(v, 0.0f);
    } else {
      const double bound = std::sqrt(6.0 / static_cast<double>(t->dim(0)));
      for (float v : t->storage()) EXPECT_LE(std::abs(v), bound);
    }
  }
}

TEST(Model, SinglePointAndDuplicates) {
  const auto p = BasicModelParams<double>::kaiming(toy_config(), 5);
  dataset::PointCloud one;
  one.points = {{0.1, -0.4, 0.7}};
  // One point: h is the per-point MLP output.
  std::vector<double> x{0.1, -0.4, 0.7};
  for (const auto& layer : p.encoder) {
    std::vector<double> y(layer.weight.dim(1));
    for (std::size_t j = 0; j < y.size(); ++j) {
      double s = layer.bias[j];
      for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * layer.weight.at(k, j);
      y[j] = std::max(0.0, s);
    }
    x = y;
  }
  const auto h = encoder_forward(p, one);
  for (std::size_t j = 0; j < x.size(); ++j) EXPECT_NEAR(h[j], x[j], 1e-14);

  const auto cloud = random_cloud(40, 6);
  auto doubled = cloud;
  doubled.points.insert(doubled.points.end(), cloud.points.begin(), cloud.points.end());
  EXPECT_EQ(encoder_forward(p, cloud), encoder_forward(p, doubled));
}

TEST(Model, PermutationInvariant) {
  const auto p = ModelParams::kaiming(toy_config(), 7);
  auto cloud = random_cloud(64, 8);
  const auto h = encoder_forward(p, cloud);
  Philox rng(9);
  for (int r = 0; r < 5; ++r) {
    shuffle(cloud.points.begin(), cloud.points.end(), rng);
    EXPECT_EQ(encoder_forward(p, cloud), h);
  }
}

TEST(Model, ZeroWeightsGiveZeroOutput) {
  const auto p = BasicModelParams<double>::zeros(toy_config());
  const std::vector<double> h(16, 0.7), e(5, -1.3);
  for (double v : project_point<double>(p, h)) EXPECT_EQ(v, 0.0);
  for (double v : project_text<double>(p, e)) EXPECT_EQ(v, 0.0);
}

TEST(Model, HandComputedPointHead) {
  ModelConfig c;
  c.encoder_widths = {3, 2};
  c.point_hidden = 2;
  c.embed_dim = 2;
  c.text_dim = 2;
  c.text_hidden1 = 2;
  c.text_hidden2 = 2;
  auto p = BasicModelParams<double>::zeros(c);
  // First layer: identity with bias (0, -1); second: swap rows, bias (0.5, 0).
  p.point_head[0].weight = TensorD(Shape{2, 2}, std::vector<double>{1, 0, 0, 1});
  p.point_head[0].bias = TensorD(Shape{2}, std::vector<double>{0, -1});
  p.point_head[1].weight = TensorD(Shape{2, 2}, std::vector<double>{0, 1, 1, 0});
  p.point_head[1].bias = TensorD(Shape{2}, std::vector<double>{0.5, 0});
  // h = (2, 0.5): relu(2, -0.5) = (2, 0); swap -> (0, 2); + bias -> (0.5, 2).
  const std::vector<double> h{2.0, 0.5};
  EXPECT_EQ(project_point<double>(p, h), (std::vector<double>{0.5, 2.0}));
}

TEST(Model, RejectsNonFiniteAndWrongWidth) {
  const auto p = ModelParams::kaiming(toy_config(), 1);
  auto cloud = random_cloud(4, 1);
  cloud.points[2][1] = std::nan("");
  try {
    encoder_forward(p, cloud);
    FAIL();
  } catch (const NnError& e) {
    EXPECT_EQ(e.code(), NnErrc::kNonFinite);
  }
  const std::vector<float> bad_h(15, 0.0f);
  try {
    project_point<float>(p, bad_h);
    FAIL();
  } catch (const NnError& e) {
    EXPECT_EQ(e.code(), NnErrc::kShapeMismatch);
  }
  std::vector<float> nan_e(5, 0.0f);
  nan_e[0] = std::numeric_limits<float>::infinity();
  EXPECT_THROW(project_text<float>(p, nan_e), NnError);
  EXPECT_THROW(encoder_forward(p, dataset::PointCloud{}), NnError);
}

TEST(Model, ConfigValidation) {
  ModelConfig c = toy_config();
  c.encoder_widths = {2, 8};
  EXPECT_THROW(c.validate(), NnError);
  c = toy_config();
  c.embed_dim = 0;
  EXPECT_THROW(c.validate(), NnError);
}

TEST(Checkpoint, RoundTripIsExact) {
  const auto p = ModelParams::kaiming(toy_config(), 11);
  const std::string bytes = encode_checkpoint(p);
  EXPECT_EQ(bytes.substr(0, 8), "ZSLCKPT1");
  const ModelParams q = decode_checkpoint(bytes);
  EXPECT_EQ(q, p);
  EXPECT_EQ(q.config, p.config);
  EXPECT_EQ(encode_checkpoint(q), bytes);
  const auto probe = random_cloud(32, 12);
  EXPECT_EQ(encoder_forward(q, probe), encoder_forward(p, probe));

  testing::TempDir dir("ckpt");
  save_checkpoint(dir / "a.bin", p);
  EXPECT_EQ(testing::read_file(dir / "a.bin"), bytes);
  EXPECT_EQ(load_checkpoint(dir / "a.bin"), p);
}

TEST(Checkpoint, DetectsCorruption) {
  const std::string bytes = encode_checkpoint(ModelParams::kaiming(toy_config(), 2));
  std::string flipped = bytes;
  flipped[bytes.size() / 2] ^= 0x40;
  EXPECT_THROW(decode_checkpoint(flipped), CheckpointError);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), CheckpointError);
  EXPECT_THROW(decode_checkpoint("ZSLCKPT2" + bytes.substr(8)), CheckpointError);
  EXPECT_THROW(decode_checkpoint(bytes + "x"), CheckpointError);
}

}  // namespace
}  // namespace scenezsl::nn
