#include <random>

#include <gtest/gtest.h>

#include "lmlrsga/lmlrsga.hpp"
#include "oracles.hpp"

using namespace lmlrsga;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}
Matrix eye(Eigen::Index n) { return Matrix::Identity(n, n); }
}  // namespace

TEST(BilinearGradients, Examples) {
  auto g = bilinear_gradients(eye(1), vec({1}), vec({0}));
  EXPECT_TRUE(g.gx == vec({0}) && g.gy == vec({-1}));
  g = bilinear_gradients(eye(1), vec({0}), vec({0}));
  EXPECT_TRUE(g.gx == vec({0}) && g.gy == vec({0}));
  g = bilinear_gradients(2 * eye(1), vec({1}), vec({1}));
  EXPECT_TRUE(g.gx == vec({2}) && g.gy == vec({-2}));
}

TEST(BilinearGradients, DimensionMismatch) {
  EXPECT_THROW(bilinear_gradients(eye(2), vec({1}), vec({0, 1})), UsageError);
}

TEST(QuadraticGradients, ReducesToBilinear) {
  std::mt19937_64 rng(1);
  const Vector x = oracle::random_vector(rng, 3);
  const Vector y = oracle::random_vector(rng, 3);
  const auto q = quadratic_gradients(Matrix::Zero(3, 3), Matrix::Zero(3, 3), eye(3), x, y);
  const auto b = bilinear_gradients(eye(3), x, y);
  EXPECT_TRUE(q.gx == b.gx);
  EXPECT_TRUE(q.gy == b.gy);
}

TEST(QuadraticGradients, Examples) {
  auto g = quadratic_gradients(eye(1), eye(1), Matrix::Zero(1, 1), vec({1}), vec({1}));
  EXPECT_TRUE(g.gx == vec({1}) && g.gy == vec({1}));
  g = quadratic_gradients(eye(1), eye(1), eye(1), vec({1}), vec({2}));
  EXPECT_TRUE(g.gx == vec({3}) && g.gy == vec({1}));
}

TEST(QuadraticGame, ConstructionChecksPsdAndSymmetry) {
  Matrix bad(2, 2);
  bad << 1, 0, 0, -1;
  EXPECT_THROW(QuadraticGame(bad, eye(1), Matrix::Zero(2, 1)), UsageError);
  Matrix asym(2, 2);
  asym << 1, 1, 0, 1;
  EXPECT_THROW(QuadraticGame(asym, eye(1), Matrix::Zero(2, 1)), UsageError);
  EXPECT_THROW(QuadraticGame(eye(2), eye(1), Matrix::Zero(1, 1)), UsageError);
  std::mt19937_64 rng(2);
  const auto game = QuadraticGame::random(4, 2, rng);
  EXPECT_EQ(evaluate_field(game, Vector::Zero(6)).norm(), 0.0);
}

TEST(ExactAntisymmetric, BilinearExample) {
  const auto game = BilinearGame::identity(1);
  Matrix expected(2, 2);
  expected << 0, 1, -1, 0;
  EXPECT_TRUE(exact_antisymmetric_block(game, vec({0.4, 2})) == expected);
}

TEST(ExactAntisymmetric, UncoupledQuadraticIsZero) {
  const QuadraticGame game(2 * eye(2), eye(3), Matrix::Zero(2, 3));
  EXPECT_EQ(exact_antisymmetric_block(game, Vector::Ones(5)).norm(), 0.0);
}

TEST(ExactAntisymmetric, MatchesFiniteDifferenceOracle) {
  std::mt19937_64 rng(4);
  Matrix c(2, 2);
  c << 1, -2, 0.5, 3;
  const BilinearGame bilinear(c);
  const auto quad = QuadraticGame::random(3, 4, rng, 0.5);
  for (const Game* game : {static_cast<const Game*>(&bilinear), static_cast<const Game*>(&quad)}) {
    const Vector w = oracle::random_vector(rng, static_cast<Eigen::Index>(game->dims().total()));
    const Matrix exact = exact_antisymmetric_block(*game, w);
    const Matrix fd = split_symmetric_antisymmetric(fd_game_hessian(*game, w)).antisymmetric;
    EXPECT_LT((exact - fd).cwiseAbs().maxCoeff(), 1e-4) << game->name();
    const auto m = static_cast<Eigen::Index>(game->dims().m);
    const auto n = static_cast<Eigen::Index>(game->dims().n);
    EXPECT_EQ(exact.topLeftCorner(m, m).norm(), 0.0);
    EXPECT_EQ(exact.bottomRightCorner(n, n).norm(), 0.0);
  }
}

TEST(ExactAntisymmetric, UnsupportedGameIsCapabilityError) {
  const ToyGanGame game;
  EXPECT_THROW(exact_antisymmetric_block(game, Vector::Zero(2)), CapabilityError);
}

TEST(BilinearDynamics, SimGdGrowthFactor) {
  const auto game = BilinearGame::identity(1);
  Vector w = vec({1, 0});
  for (int k = 0; k < 50; ++k) {
    const Vector next = simgd_step(game, w, 0.1);
    EXPECT_NEAR(next.norm() / w.norm(), std::sqrt(1.01), 1e-12);
    w = next;
  }
}

namespace {
ToyGanConfig matched_point_mass() {
  ToyGanConfig cfg;
  cfg.generator_params = 1;
  cfg.discriminator_params = 2;
  cfg.real_mean = 0.0;
  return cfg;
}
}  // namespace

TEST(ToyGan, StationaryDiscriminatorForMatchedDistributions) {
  // theta_G = 0 puts every fake sample at 0, the real point mass; theta_D = 0 gives D = 1/2.
  const ToyGanGame game(matched_point_mass());
  const Batch batch = game.sample_batch({9, 0});
  EXPECT_EQ(toygan_gradients(game, Vector::Zero(3), &batch).gy.norm(), 0.0);
  EXPECT_EQ(toygan_gradients(game, Vector::Zero(3), nullptr).gy.norm(), 0.0);
}

TEST(ToyGan, PenaltySeparability) {
  ToyGanConfig cfg;
  cfg.generator_params = 3;
  cfg.discriminator_params = 3;
  cfg.real_mean = 1.0;
  cfg.real_std = 0.2;
  cfg.penalty = 0.0;
  const ToyGanGame free_game(cfg);
  cfg.penalty = 1.0;
  const ToyGanGame penalized(cfg);
  const Vector w = vec({0.3, -0.4, 1.2, 0.1, 0.2, -0.3});
  const Batch batch = free_game.sample_batch({1, 3});
  const auto a = toygan_gradients(free_game, w, &batch);
  const auto b = toygan_gradients(penalized, w, &batch);
  const Vector theta = w.head(3);
  EXPECT_LT((b.gx - a.gx - theta / theta.norm()).norm(), 1e-15);
  EXPECT_TRUE(a.gy == b.gy);

  cfg.penalty_norm = PenaltyNorm::l1;
  const ToyGanGame l1(cfg);
  const auto c = toygan_gradients(l1, w, &batch);
  EXPECT_LT((c.gx - a.gx - vec({1, -1, 1})).norm(), 1e-15);
}

TEST(ToyGan, SameBatchIsBitIdentical) {
  ToyGanConfig cfg;
  cfg.generator_params = 2;
  cfg.discriminator_params = 4;
  cfg.real_std = 1.0;
  const ToyGanGame game(cfg);
  const Vector w = vec({0.1, 0.2, 0.3, -0.1, 0.05, 0.0});
  const Batch b1 = game.sample_batch({42, 7});
  const Batch b2 = game.sample_batch({42, 7});
  EXPECT_EQ(b1.indices, b2.indices);
  const auto g1 = toygan_gradients(game, w, &b1);
  const auto g2 = toygan_gradients(game, w, &b2);
  EXPECT_TRUE(g1.gx == g2.gx);
  EXPECT_TRUE(g1.gy == g2.gy);
  const ToyGanGame again(cfg);
  EXPECT_TRUE(toygan_gradients(again, w, &b1).gy == g1.gy);
}

TEST(ToyGan, BatchesHaveRequestedSizeAndNeighboursOverlap) {
  const ToyGanGame game;
  for (std::size_t k = 0; k < 40; ++k) {
    const Batch a = game.sample_batch({5, k});
    const Batch b = game.sample_batch({5, k + 1});
    EXPECT_EQ(a.indices.size(), game.config().batch_size);
    EXPECT_TRUE(std::is_sorted(a.indices.begin(), a.indices.end()));
    EXPECT_FALSE(intersect(a, b).empty());
  }
}

TEST(ToyGan, ClosedFormMatchesSameBatchFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (std::size_t m = 1; m <= 4; ++m) {
    for (std::size_t n = 1; n <= 4; ++n) {
      ToyGanConfig cfg;
      cfg.generator_params = m;
      cfg.discriminator_params = n;
      cfg.real_mean = 0.7;
      cfg.real_std = 0.4;
      const ToyGanGame game(cfg);
      const Batch batch = game.sample_batch({m * 10 + n, 2});
      const Vector w = oracle::random_vector(rng, static_cast<Eigen::Index>(m + n), 0.4);
      const auto g = toygan_gradients(game, w, &batch);
      const double h = 1e-6;
      Vector probe = w;
      for (Eigen::Index j = 0; j < w.size(); ++j) {
        const bool is_x = j < static_cast<Eigen::Index>(m);
        auto loss = [&](const Vector& v) { return is_x ? *game.loss_f(v, &batch) : *game.loss_g(v, &batch); };
        probe[j] = w[j] + h;
        const double plus = loss(probe);
        probe[j] = w[j] - h;
        const double minus = loss(probe);
        probe[j] = w[j];
        const double fd = (plus - minus) / (2 * h);
        const double exact = is_x ? g.gx[j] : g.gy[j - static_cast<Eigen::Index>(m)];
        EXPECT_NEAR(exact, fd, 1e-5) << "m=" << m << " n=" << n << " j=" << j;
      }
    }
  }
}

TEST(ToyGan, SaturatedDiscriminatorStaysFinite) {
  ToyGanConfig cfg;
  cfg.discriminator_params = 2;
  cfg.real_mean = 1.0;
  const ToyGanGame game(cfg);
  const Vector w = vec({1.0, 1e4, 1e4});
  EXPECT_TRUE(evaluate_field(game, w).allFinite());
  EXPECT_TRUE(std::isfinite(*game.loss_f(w, nullptr)));
  EXPECT_TRUE(std::isfinite(*game.loss_g(vec({1.0, -1e4, -1e4}), nullptr)));
}

TEST(ToyGan, RejectsBadConfig) {
  ToyGanConfig cfg;
  cfg.generator_params = 5;
  EXPECT_THROW(ToyGanGame{cfg}, UsageError);
  cfg = {};
  cfg.penalty = -1;
  EXPECT_THROW(ToyGanGame{cfg}, UsageError);
}
