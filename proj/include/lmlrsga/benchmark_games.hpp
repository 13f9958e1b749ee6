#pragma once

// Closed-form benchmark games: bilinear, convex-concave quadratic, and a
// toy-scale GAN with a sigmoid discriminator.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lmlrsga/game.hpp"

namespace lmlrsga {

struct PlayerGradients {
  Vector gx;
  Vector gy;
};

// f = x^T C y, g = -x^T C y: gx = C y, gy = -C^T x.
inline PlayerGradients bilinear_gradients(const Matrix& coupling, const Vector& x, const Vector& y) {
  if (x.size() != coupling.rows() || y.size() != coupling.cols()) {
    throw UsageError("bilinear_gradients: dimension mismatch");
  }
  return {coupling * y, -(coupling.transpose() * x)};
}

// f = x^T P x / 2 + x^T B y, g = y^T Q y / 2 - x^T B y.
inline PlayerGradients quadratic_gradients(const Matrix& P, const Matrix& Q, const Matrix& B, const Vector& x,
                                           const Vector& y) {
  if (P.rows() != P.cols() || Q.rows() != Q.cols() || B.rows() != P.rows() || B.cols() != Q.rows() ||
      x.size() != P.rows() || y.size() != Q.rows()) {
    throw UsageError("quadratic_gradients: dimension mismatch");
  }
  return {P * x + B * y, Q * y - B.transpose() * x};
}

class BilinearGame final : public Game {
 public:
  explicit BilinearGame(Matrix coupling) : coupling_(std::move(coupling)) {
    if (coupling_.rows() == 0 || coupling_.cols() == 0) throw UsageError("BilinearGame: empty coupling");
  }
  // C = scale * I_n.
  static BilinearGame identity(std::size_t n, double scale = 1.0) {
    const auto k = static_cast<Eigen::Index>(n);
    return BilinearGame(scale * Matrix::Identity(k, k));
  }

  std::string name() const override { return "bilinear"; }
  GameDims dims() const override {
    return {static_cast<std::size_t>(coupling_.rows()), static_cast<std::size_t>(coupling_.cols())};
  }
  const Matrix& coupling() const noexcept { return coupling_; }

  Vector grad_x_f(const Vector& w, const Batch*) const override {
    require_length(w, dims().total(), "BilinearGame");
    return coupling_ * w.tail(coupling_.cols());
  }
  Vector grad_y_g(const Vector& w, const Batch*) const override {
    require_length(w, dims().total(), "BilinearGame");
    return -(coupling_.transpose() * w.head(coupling_.rows()));
  }
  std::optional<double> loss_f(const Vector& w, const Batch*) const override {
    return w.head(coupling_.rows()).dot(coupling_ * w.tail(coupling_.cols()));
  }
  std::optional<double> loss_g(const Vector& w, const Batch* b) const override { return -*loss_f(w, b); }

  std::optional<MixedBlocks> mixed_blocks(const Vector&) const override {
    return MixedBlocks{coupling_, -coupling_.transpose()};
  }

 private:
  Matrix coupling_;
};

class QuadraticGame final : public Game {
 public:
  QuadraticGame(Matrix P, Matrix Q, Matrix B) : P_(std::move(P)), Q_(std::move(Q)), B_(std::move(B)) {
    if (P_.rows() == 0 || Q_.rows() == 0) throw UsageError("QuadraticGame: empty block");
    if (P_.rows() != P_.cols() || Q_.rows() != Q_.cols() || B_.rows() != P_.rows() || B_.cols() != Q_.rows()) {
      throw UsageError("QuadraticGame: block dimensions do not agree");
    }
    check_psd(P_, "P");
    check_psd(Q_, "Q");
  }

  std::string name() const override { return "quadratic"; }
  GameDims dims() const override {
    return {static_cast<std::size_t>(P_.rows()), static_cast<std::size_t>(Q_.rows())};
  }
  const Matrix& P() const noexcept { return P_; }
  const Matrix& Q() const noexcept { return Q_; }
  const Matrix& B() const noexcept { return B_; }

  Vector grad_x_f(const Vector& w, const Batch*) const override {
    require_length(w, dims().total(), "QuadraticGame");
    return P_ * w.head(P_.rows()) + B_ * w.tail(Q_.rows());
  }
  Vector grad_y_g(const Vector& w, const Batch*) const override {
    require_length(w, dims().total(), "QuadraticGame");
    return Q_ * w.tail(Q_.rows()) - B_.transpose() * w.head(P_.rows());
  }
  std::optional<double> loss_f(const Vector& w, const Batch*) const override {
    const auto x = w.head(P_.rows());
    const auto y = w.tail(Q_.rows());
    return 0.5 * x.dot(P_ * x) + x.dot(B_ * y);
  }
  std::optional<double> loss_g(const Vector& w, const Batch*) const override {
    const auto x = w.head(P_.rows());
    const auto y = w.tail(Q_.rows());
    return 0.5 * y.dot(Q_ * y) - x.dot(B_ * y);
  }
  std::optional<MixedBlocks> mixed_blocks(const Vector&) const override {
    return MixedBlocks{B_, -B_.transpose()};
  }

  // Random instance: P, Q = L L^T / k scaled by `curvature`, B with N(0, 1) entries.
  template <class Rng>
  static QuadraticGame random(std::size_t m, std::size_t n, Rng& rng, double curvature = 0.1) {
    std::normal_distribution<double> normal(0.0, 1.0);
    auto gaussian = [&](std::size_t r, std::size_t c) {
      Matrix out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, j) = normal(rng);
      return out;
    };
    const Matrix lp = gaussian(m, m);
    const Matrix lq = gaussian(n, n);
    Matrix P = curvature * (lp * lp.transpose()) / static_cast<double>(m);
    Matrix Q = curvature * (lq * lq.transpose()) / static_cast<double>(n);
    P = 0.5 * (P + P.transpose()).eval();
    Q = 0.5 * (Q + Q.transpose()).eval();
    return QuadraticGame(std::move(P), std::move(Q), gaussian(m, n));
  }

 private:
  static void check_psd(const Matrix& M, const char* which) {
    const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw UsageError(std::string("QuadraticGame: ") + which + " is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10 * scale) {
      throw UsageError(std::string("QuadraticGame: ") + which + " is not positive semidefinite");
    }
  }

  Matrix P_, Q_, B_;
};

// A = [[0, (d2xy f - d2yx g^T)/2], [(d2yx g - d2xy f^T)/2, 0]] from closed-form blocks.
inline Matrix exact_antisymmetric_block(const Game& game, const Vector& w) {
  const auto blocks = game.mixed_blocks(w);
  if (!blocks) throw CapabilityError("exact_antisymmetric_block: game '" + game.name() + "' has no closed-form mixed blocks");
  const GameDims d = game.dims();
  const auto m = static_cast<Eigen::Index>(d.m);
  const auto n = static_cast<Eigen::Index>(d.n);
  Matrix A = Matrix::Zero(m + n, m + n);
  A.topRightCorner(m, n) = 0.5 * (blocks->dxy_f - blocks->dyx_g.transpose());
  A.bottomLeftCorner(n, m) = 0.5 * (blocks->dyx_g - blocks->dxy_f.transpose());
  return A;
}

enum class PenaltyNorm { l1, l2 };

struct ToyGanConfig {
  std::size_t generator_params = 1;      // m in [1, 4]
  std::size_t discriminator_params = 1;  // n in [1, 4]
  double real_mean = 0.0;
  double real_std = 0.0;  // 0 gives a point mass at real_mean
  double penalty = 0.01;  // lambda
  PenaltyNorm penalty_norm = PenaltyNorm::l2;
  std::size_t pool_size = 512;
  std::size_t batch_size = 32;
  std::uint64_t data_seed = 7;
};

// Scalar GAN. Generator G(z) = theta_G . phi(z) with phi = (1, z, z^2, z^3),
// discriminator D(x) = sigmoid(theta_D . psi(x)) with psi = (x, 1, x^2, x^3),
// both truncated to the configured parameter counts; z ~ U(-1, 1). The
// default (m = n = 1, real point mass at 0) is the two-parameter Dirac GAN.
// Player 1 is the generator (f = L_G), player 2 the discriminator (g = L_D):
//   L_D = -E log D(x_real) - E log(1 - D(G(z)))
//   L_G = -E log D(G(z)) + lambda * ||theta_G||
class ToyGanGame final : public Game {
 public:
  static constexpr double kClamp = 1e-12;

  explicit ToyGanGame(ToyGanConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.generator_params < 1 || cfg_.generator_params > 4 || cfg_.discriminator_params < 1 ||
        cfg_.discriminator_params > 4) {
      throw UsageError("ToyGanGame: parameter counts must lie in [1, 4]");
    }
    if (cfg_.penalty < 0.0 || cfg_.real_std < 0.0) throw UsageError("ToyGanGame: penalty and real_std must be >= 0");
    if (cfg_.pool_size == 0 || cfg_.batch_size == 0 || cfg_.batch_size > cfg_.pool_size) {
      throw UsageError("ToyGanGame: need 1 <= batch_size <= pool_size");
    }
    std::mt19937_64 rng(cfg_.data_seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    latents_.resize(cfg_.pool_size);
    reals_.resize(cfg_.pool_size);
    for (std::size_t i = 0; i < cfg_.pool_size; ++i) {
      latents_[i] = uniform(rng);
      reals_[i] = cfg_.real_std > 0.0 ? cfg_.real_mean + cfg_.real_std * normal(rng) : cfg_.real_mean;
    }
  }

  std::string name() const override { return "toygan"; }
  GameDims dims() const override { return {cfg_.generator_params, cfg_.discriminator_params}; }
  const ToyGanConfig& config() const noexcept { return cfg_; }
  bool stochastic() const override { return true; }

  // Consecutive token indices slide a contiguous window over the pool by
  // max(1, b/2), so neighbouring batches overlap whenever b >= 2.
  Batch sample_batch(BatchToken token) const override {
    const std::size_t pool = cfg_.pool_size;
    const std::size_t stride = std::max<std::size_t>(1, cfg_.batch_size / 2);
    const std::uint64_t origin = splitmix64(token.seed) % pool;
    const std::uint64_t start = (origin + (token.index % pool) * stride) % pool;
    Batch out;
    out.indices.reserve(cfg_.batch_size);
    for (std::size_t j = 0; j < cfg_.batch_size; ++j) out.indices.push_back((start + j) % pool);
    std::sort(out.indices.begin(), out.indices.end());
    return out;
  }

  Vector grad_x_f(const Vector& w, const Batch* batch) const override {
    return gradients(w, batch).gx;
  }
  Vector grad_y_g(const Vector& w, const Batch* batch) const override {
    return gradients(w, batch).gy;
  }

  // (d L_G / d theta_G, d L_D / d theta_D) on the batch.
  PlayerGradients gradients(const Vector& w, const Batch* batch) const {
    require_length(w, dims().total(), "ToyGanGame");
    const auto m = static_cast<Eigen::Index>(cfg_.generator_params);
    const auto n = static_cast<Eigen::Index>(cfg_.discriminator_params);
    const Vector theta_g = w.head(m);
    const Vector theta_d = w.tail(n);
    Vector gx = Vector::Zero(m);
    Vector gy = Vector::Zero(n);
    std::size_t count = 0;
    for_each_sample(batch, [&](std::size_t i) {
      const double z = latents_[i];
      const double real = reals_[i];
      const double fake = generate(theta_g, z);
      const double d_real = discriminate(theta_d, real);
      const double d_fake = discriminate(theta_d, fake);
      const Vector psi_real = features(real, n);
      const Vector psi_fake = features(fake, n);
      gy += -(1.0 - d_real) * psi_real + d_fake * psi_fake;
      const double slope = theta_d.dot(feature_derivatives(fake, n));
      gx += -(1.0 - d_fake) * slope * generator_features(z, m);
      ++count;
    });
    gx /= static_cast<double>(count);
    gy /= static_cast<double>(count);
    gx += cfg_.penalty * penalty_gradient(theta_g);
    return {gx, gy};
  }

  // L_G
  std::optional<double> loss_f(const Vector& w, const Batch* batch) const override {
    require_length(w, dims().total(), "ToyGanGame");
    const auto m = static_cast<Eigen::Index>(cfg_.generator_params);
    const Vector theta_g = w.head(m);
    const Vector theta_d = w.tail(static_cast<Eigen::Index>(cfg_.discriminator_params));
    double sum = 0.0;
    std::size_t count = 0;
    for_each_sample(batch, [&](std::size_t i) {
      sum += -std::log(discriminate(theta_d, generate(theta_g, latents_[i])));
      ++count;
    });
    return sum / static_cast<double>(count) + cfg_.penalty * penalty_value(theta_g);
  }

  // L_D
  std::optional<double> loss_g(const Vector& w, const Batch* batch) const override {
    require_length(w, dims().total(), "ToyGanGame");
    const Vector theta_g = w.head(static_cast<Eigen::Index>(cfg_.generator_params));
    const Vector theta_d = w.tail(static_cast<Eigen::Index>(cfg_.discriminator_params));
    double sum = 0.0;
    std::size_t count = 0;
    for_each_sample(batch, [&](std::size_t i) {
      sum += -std::log(discriminate(theta_d, reals_[i]));
      sum += -std::log(1.0 - discriminate(theta_d, generate(theta_g, latents_[i])));
      ++count;
    });
    return sum / static_cast<double>(count);
  }

  double penalty_value(const Vector& theta_g) const {
    return cfg_.penalty_norm == PenaltyNorm::l2 ? theta_g.norm() : theta_g.lpNorm<1>();
  }

  // Gradient of ||theta_G||; the zero subgradient is used at kinks.
  Vector penalty_gradient(const Vector& theta_g) const {
    if (cfg_.penalty_norm == PenaltyNorm::l1) {
      return theta_g.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    }
    const double norm = theta_g.norm();
    return norm > 0.0 ? Vector(theta_g / norm) : Vector::Zero(theta_g.size());
  }

 private:
  template <class Fn>
  void for_each_sample(const Batch* batch, Fn&& fn) const {
    if (batch == nullptr) {
      for (std::size_t i = 0; i < cfg_.pool_size; ++i) fn(i);
      return;
    }
    if (batch->empty()) throw UsageError("ToyGanGame: empty batch");
    for (const std::size_t i : batch->indices) {
      if (i >= cfg_.pool_size) throw UsageError("ToyGanGame: batch index outside the data pool");
      fn(i);
    }
  }

  static double sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
  }

  static double discriminate(const Vector& theta_d, double x) {
    const double u = theta_d.dot(features(x, theta_d.size()));
    return std::clamp(sigmoid(u), kClamp, 1.0 - kClamp);
  }

  static double generate(const Vector& theta_g, double z) { return theta_g.dot(generator_features(z, theta_g.size())); }

  static Vector generator_features(double z, Eigen::Index m) {
    const std::array<double, 4> all{1.0, z, z * z, z * z * z};
    return Eigen::Map<const Vector>(all.data(), m);
  }
  static Vector features(double x, Eigen::Index n) {
    const std::array<double, 4> all{x, 1.0, x * x, x * x * x};
    return Eigen::Map<const Vector>(all.data(), n);
  }
  static Vector feature_derivatives(double x, Eigen::Index n) {
    const std::array<double, 4> all{1.0, 0.0, 2.0 * x, 3.0 * x * x};
    return Eigen::Map<const Vector>(all.data(), n);
  }

  static std::uint64_t splitmix64(std::uint64_t v) {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
  }

  ToyGanConfig cfg_;
  std::vector<double> latents_;
  std::vector<double> reals_;
};

// Functional form of ToyGanGame::gradients.
inline PlayerGradients toygan_gradients(const ToyGanGame& game, const Vector& w, const Batch* batch) {
  return game.gradients(w, batch);
}

}  // namespace lmlrsga
