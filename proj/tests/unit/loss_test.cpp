#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "scenezsl/loss/contrastive.hpp"
#include "test_support.hpp"

namespace scenezsl::loss {
namespace {

using testing::random_vector;

// Straightforward reference: explicit normalization, softmax probabilities,
// and -log of the summed positive probability.
double oracle_loss(const std::vector<double>& z, const std::vector<double>& v, std::size_t n, std::size_t dim,
                   double tau, LossForm form, const std::vector<std::size_t>& groups) {
  const auto group = [&](std::size_t i) { return groups.empty() ? i : groups[i]; };
  std::vector<std::vector<double>> rows;
  for (const auto* m : {&z, &v}) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r(m->begin() + static_cast<long>(i * dim), m->begin() + static_cast<long>((i + 1) * dim));
      double norm = 0.0;
      for (double x : r) norm += x * x;
      for (double& x : r) x /= std::sqrt(norm);
      rows.push_back(r);
    }
  }
  const auto dot = [&](std::size_t a, std::size_t b) {
    return std::inner_product(rows[a].begin(), rows[a].end(), rows[b].begin(), 0.0);
  };
  double total = 0.0;
  if (form == LossForm::kCrossModal) {
    for (std::size_t dir = 0; dir < 2; ++dir) {
      for (std::size_t i = 0; i < n; ++i) {
        double all = 0.0, pos = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double e = std::exp((dir == 0 ? dot(i, n + j) : dot(n + i, j)) / tau);
          all += e;
          if (group(i) == group(j)) pos += e;
        }
        total += -std::log(pos / all);
      }
    }
    return total / (2.0 * static_cast<double>(n));
  }
  for (std::size_t a = 0; a < 2 * n; ++a) {
    double all = 0.0, pos = 0.0;
    for (std::size_t b = 0; b < 2 * n; ++b) {
      if (a == b) continue;
      const double e = std::exp(dot(a, b) / tau);
      all += e;
      if (group(a % n) == group(b % n)) pos += e;
    }
    total += -std::log(pos / all);
  }
  return total / (2.0 * static_cast<double>(n));
}

TEST(CosineSim, Basics) {
  const std::vector<double> a{3, 4}, b{0, 2}, c{-1, 0}, d{1, 0};
  EXPECT_DOUBLE_EQ(cosine_sim(a, a), 1.0);
  EXPECT_EQ(cosine_sim(d, b), 0.0);
  EXPECT_EQ(cosine_sim(d, c), -1.0);
  const std::vector<double> zero{0, 0};
  try {
    cosine_sim(zero, a);
    FAIL();
  } catch (const LossError& e) {
    EXPECT_EQ(e.code(), LossError::Code::kZeroVector);
  }
}

TEST(Contrastive, SinglePairIsZero) {
  const auto z = random_vector(8, 1), v = random_vector(8, 2);
  const auto r = contrastive_loss(z, v, 1, 8, 0.1);
  EXPECT_EQ(r.loss, 0.0);
  for (double g : r.grad_z) EXPECT_EQ(g, 0.0);
}

TEST(Contrastive, TwoOrthogonalPairs) {
  const std::vector<double> z{1, 0, 0, 0, 1, 0};
  const auto r = contrastive_loss(z, z, 2, 3, 1.0);
  EXPECT_NEAR(r.loss, std::log(1.0 + std::exp(-1.0)), 1e-15);
  EXPECT_NEAR(r.loss, 0.3133, 5e-5);
  EXPECT_EQ(r.similarity.at(0, 1), 0.0);
  EXPECT_EQ(r.similarity.at(1, 1), 1.0);
}

TEST(Contrastive, MatchesOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t n = 2 + seed % 5, dim = 4 + seed % 3;
    const auto z = random_vector(n * dim, seed * 2 + 100), v = random_vector(n * dim, seed * 2 + 101);
    std::vector<std::size_t> groups(n);
    for (std::size_t i = 0; i < n; ++i) groups[i] = i % 2 == 1 && i > 0 ? i - 1 : i;
    for (auto form : {LossForm::kCrossModal, LossForm::kConcatenated}) {
      EXPECT_NEAR(contrastive_loss(z, v, n, dim, 0.1, form).loss, oracle_loss(z, v, n, dim, 0.1, form, {}), 1e-12);
      EXPECT_NEAR(contrastive_loss(z, v, n, dim, 0.5, form, groups).loss,
                  oracle_loss(z, v, n, dim, 0.5, form, groups), 1e-12);
    }
  }
}

void check_gradient(LossForm form, const std::vector<std::size_t>& groups, std::uint64_t seed) {
  const std::size_t n = groups.empty() ? 5 : groups.size(), dim = 6;
  auto z = random_vector(n * dim, seed), v = random_vector(n * dim, seed + 1);
  const double tau = 0.2;
  const auto r = contrastive_loss(z, v, n, dim, tau, form, groups);
  const double h = 1e-6;
  for (auto* side : {&z, &v}) {
    const auto& analytic = side == &z ? r.grad_z : r.grad_v;
    for (std::size_t k = 0; k < side->size(); ++k) {
      const double keep = (*side)[k];
      (*side)[k] = keep + h;
      const double up = contrastive_loss(z, v, n, dim, tau, form, groups).loss;
      (*side)[k] = keep - h;
      const double down = contrastive_loss(z, v, n, dim, tau, form, groups).loss;
      (*side)[k] = keep;
      const double fd = (up - down) / (2 * h);
      EXPECT_NEAR(analytic[k], fd, 1e-4 * std::max(1e-3, std::abs(fd))) << "k=" << k;
    }
  }
}

TEST(Contrastive, GradientCrossModal) { check_gradient(LossForm::kCrossModal, {}, 10); }
TEST(Contrastive, GradientConcatenated) { check_gradient(LossForm::kConcatenated, {}, 20); }
TEST(Contrastive, GradientWithSharedCaptions) {
  check_gradient(LossForm::kCrossModal, {0, 1, 0, 3, 1, 5}, 30);
  check_gradient(LossForm::kConcatenated, {0, 1, 0, 3, 1, 5}, 40);
}

TEST(Contrastive, DistinctGroupsEqualPlainTarget) {
  const auto z = random_vector(24, 5), v = random_vector(24, 6);
  const std::vector<std::size_t> ids{0, 1, 2, 3};
  EXPECT_EQ(contrastive_loss(z, v, 4, 6, 0.1).loss,
            contrastive_loss(z, v, 4, 6, 0.1, LossForm::kCrossModal, ids).loss);
}

TEST(Contrastive, PermutationInvariant) {
  const std::size_t n = 6, dim = 4;
  const auto z = random_vector(n * dim, 7), v = random_vector(n * dim, 8);
  const std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
  std::vector<double> zp(z.size()), vp(v.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      zp[i * dim + k] = z[perm[i] * dim + k];
      vp[i * dim + k] = v[perm[i] * dim + k];
    }
  }
  EXPECT_NEAR(contrastive_loss(z, v, n, dim, 0.1).loss, contrastive_loss(zp, vp, n, dim, 0.1).loss, 1e-13);
}

TEST(Contrastive, ScaleInvariant) {
  const std::size_t n = 5, dim = 4;
  const auto z = random_vector(n * dim, 9), v = random_vector(n * dim, 10);
  auto zs = z;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = 0.1 + 3.0 * static_cast<double>(i);
    for (std::size_t k = 0; k < dim; ++k) zs[i * dim + k] *= c;
  }
  EXPECT_NEAR(contrastive_loss(z, v, n, dim, 0.1).loss, contrastive_loss(zs, v, n, dim, 0.1).loss, 1e-12);
}

TEST(Contrastive, PositiveForRandomBatches) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto z = random_vector(32, seed), v = random_vector(32, seed + 50);
    EXPECT_GT(contrastive_loss(z, v, 4, 8, 0.1).loss, 0.0);
  }
}

TEST(Contrastive, GradientDescentDecreasesMonotonically) {
  const std::size_t n = 16, dim = 8;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto z = random_vector(n * dim, seed + 300), v = random_vector(n * dim, seed + 400);
    double previous = contrastive_loss(z, v, n, dim, 0.1).loss;
    for (int step = 0; step < 100; ++step) {
      const auto r = contrastive_loss(z, v, n, dim, 0.1);
      for (std::size_t k = 0; k < z.size(); ++k) {
        z[k] -= 0.1 * r.grad_z[k];
        v[k] -= 0.1 * r.grad_v[k];
      }
      const double now = contrastive_loss(z, v, n, dim, 0.1).loss;
      ASSERT_LT(now, previous) << "seed " << seed << " step " << step;
      previous = now;
    }
  }
}

TEST(Contrastive, Errors) {
  const std::vector<double> z{1, 0}, zero{0, 0};
  const auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const LossError& e) {
      return e.code();
    }
    ADD_FAILURE() << "no error";
    return LossError::Code::kShapeMismatch;
  };
  EXPECT_EQ(code([&] { contrastive_loss({}, {}, 0, 2, 0.1); }), LossError::Code::kBatchTooSmall);
  EXPECT_EQ(code([&] { contrastive_loss(z, z, 1, 2, 0.0); }), LossError::Code::kBadTemperature);
  EXPECT_EQ(code([&] { contrastive_loss(z, z, 2, 2, 0.1); }), LossError::Code::kShapeMismatch);
  EXPECT_EQ(code([&] { contrastive_loss(zero, z, 1, 2, 0.1); }), LossError::Code::kZeroVector);
  const std::vector<std::size_t> bad_groups{0, 1};
  EXPECT_EQ(code([&] { contrastive_loss(z, z, 1, 2, 0.1, LossForm::kCrossModal, bad_groups); }),
            LossError::Code::kShapeMismatch);
}

}  // namespace
}  // namespace scenezsl::loss
