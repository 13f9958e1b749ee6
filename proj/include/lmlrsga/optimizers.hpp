#pragma once

// Step rules: SimGD, exact SGA, explicit-matrix LRSGA (dense oracle),
// LM-LRSGA (two-loop recursions over a bounded pair history), its EMA
// variant, and an Adam baseline.

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "lmlrsga/benchmark_games.hpp"
#include "lmlrsga/curvature.hpp"
#include "lmlrsga/game.hpp"

namespace lmlrsga {

// How the gradient differences of a secant pair are formed for stochastic games.
//  deterministic: g_{B_{k+1}}(w_{k+1}) - g_{B_k}(w_k)   (plain difference)
//  displacement:  g_{B_k}(w_{k+1})     - g_{B_k}(w_k)
//  overlap:       g_{I_k}(w_{k+1})     - g_{I_k}(w_k),  I_k = B_k n B_{k+1}
enum class BatchMode { deterministic, displacement, overlap };

inline std::string_view to_string(BatchMode mode) {
  switch (mode) {
    case BatchMode::deterministic: return "deterministic";
    case BatchMode::displacement: return "displacement";
    case BatchMode::overlap: return "overlap";
  }
  return "?";
}

struct AdamParams {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerConfig {
  double eta = 0.2;
  double tau = 0.002;
  double eps_x = 0.0;
  double eps_y = 0.0;
  std::size_t history = 10;
  double beta = 0.9;
  BatchMode batch_mode = BatchMode::deterministic;
  AdamParams adam;
  // Exact SGA on games without closed-form mixed blocks uses the
  // finite-difference Hessian when this is set.
  bool sga_fd_fallback = false;

  void validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta)) throw UsageError("OptimizerConfig: eta must be > 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw UsageError("OptimizerConfig: tau must be >= 0");
    if (!(eps_x >= 0.0) || !(eps_y >= 0.0)) throw UsageError("OptimizerConfig: eps_x, eps_y must be >= 0");
    if (history < 1) throw UsageError("OptimizerConfig: history must be >= 1");
    if (!(beta >= 0.0 && beta < 1.0)) throw UsageError("OptimizerConfig: beta must lie in [0, 1)");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.eps > 0.0)) {
      throw UsageError("OptimizerConfig: invalid Adam parameters");
    }
  }
};

// Batches seen by one step: B_k, used for the step itself, and B_{k+1},
// needed only by the plain and overlap secant differences. Both are null
// for deterministic games.
struct StepBatches {
  const Batch* current = nullptr;
  const Batch* next = nullptr;
};

// w' = w - eta F(w)
inline Vector simgd_step(const Game& game, const Vector& w, double eta, const Batch* batch = nullptr) {
  if (!(eta > 0.0)) throw UsageError("simgd_step: eta must be > 0");
  return w - eta * evaluate_field(game, w, batch);
}

// w' = w - eta (I - tau A(w)) F(w)
inline Vector sga_step_exact(const Game& game, const Vector& w, double eta, double tau, const Batch* batch = nullptr,
                             bool fd_fallback = false) {
  if (!(eta > 0.0) || !(tau >= 0.0)) throw UsageError("sga_step_exact: need eta > 0, tau >= 0");
  const Vector field = evaluate_field(game, w, batch);
  Matrix A;
  if (game.mixed_blocks(w)) {
    A = exact_antisymmetric_block(game, w);
  } else if (fd_fallback) {
    A = split_symmetric_antisymmetric(fd_game_hessian(game, w, kDefaultFdStep, batch)).antisymmetric;
  } else {
    throw CapabilityError("sga_step_exact: game '" + game.name() + "' has no closed-form antisymmetric block");
  }
  Vector next = w - eta * (field - tau * (A * field));
  require_finite(next, "sga_step_exact");
  return next;
}

// Secant gradient differences (d_x f, d_y g) between w_k and w_next per `mode`.
inline PlayerGradients consistent_gradient_difference(const Game& game, const Vector& w_k, const Vector& w_next,
                                                      BatchMode mode, const Batch* batch_k, const Batch* batch_next) {
  const GameDims dims = game.dims();
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  Vector diff;
  switch (mode) {
    case BatchMode::deterministic:
      diff = evaluate_field(game, w_next, batch_next) - evaluate_field(game, w_k, batch_k);
      break;
    case BatchMode::displacement:
      diff = evaluate_field(game, w_next, batch_k) - evaluate_field(game, w_k, batch_k);
      break;
    case BatchMode::overlap: {
      if (batch_k == nullptr || batch_next == nullptr) {
        diff = evaluate_field(game, w_next, batch_k) - evaluate_field(game, w_k, batch_k);
        break;
      }
      const Batch shared = intersect(*batch_k, *batch_next);
      if (shared.empty()) {
        throw ConfigError("overlap batch mode: consecutive mini-batches do not intersect");
      }
      diff = evaluate_field(game, w_next, &shared) - evaluate_field(game, w_k, &shared);
      break;
    }
  }
  return {diff.head(m), diff.tail(n)};
}

// Dense Broyden estimates M (m x n) and N (n x m); oracle for LM-LRSGA.
struct ExplicitLrsgaState {
  Matrix M;
  Matrix N;

  static ExplicitLrsgaState zero(GameDims dims) {
    const auto m = static_cast<Eigen::Index>(dims.m);
    const auto n = static_cast<Eigen::Index>(dims.n);
    return {Matrix::Zero(m, n), Matrix::Zero(n, m)};
  }
};

namespace detail {

inline Vector apply_adjusted_step(const Vector& w, const Vector& gx, const Vector& gy, const Vector& adj_x,
                                  const Vector& adj_y, double eta) {
  const Eigen::Index m = gx.size();
  const Eigen::Index n = gy.size();
  Vector next(m + n);
  next.head(m) = w.head(m) - eta * (gx - adj_x);
  next.tail(n) = w.tail(n) - eta * (gy - adj_y);
  return next;
}

inline std::optional<CurvaturePair> secant_pair(const Game& game, const Vector& w, const Vector& next,
                                                const OptimizerConfig& cfg, const StepBatches& batches) {
  const GameDims dims = game.dims();
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  const Vector step = next - w;
  if (step.squaredNorm() < kDegenerateStepFloor) return std::nullopt;
  const PlayerGradients diff =
      consistent_gradient_difference(game, w, next, cfg.batch_mode, batches.current, batches.next);
  return make_pair_from_differences(step.head(m), step.tail(n), diff.gx, diff.gy, cfg.eps_x, cfg.eps_y);
}

}  // namespace detail

// One LRSGA step with dense M, N:
//   x' = x - eta (d_x f - tau/2 (M - N^T) d_y g)
//   y' = y - eta (d_y g - tau/2 (N - M^T) d_x f)
// then the rank-one Broyden update of M and N from the realized step. A
// degenerate step leaves the state untouched.
inline Vector lrsga_step_explicit(const Game& game, const Vector& w, ExplicitLrsgaState& state,
                                  const OptimizerConfig& cfg, const StepBatches& batches = {}) {
  const GameDims dims = game.dims();
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  if (state.M.rows() != m || state.M.cols() != n || state.N.rows() != n || state.N.cols() != m) {
    throw UsageError("lrsga_step_explicit: state does not match game dims");
  }
  const Vector field = evaluate_field(game, w, batches.current);
  const Vector gx = field.head(m);
  const Vector gy = field.tail(n);
  const Vector adj_x = 0.5 * cfg.tau * (state.M * gy - state.N.transpose() * gy);
  const Vector adj_y = 0.5 * cfg.tau * (state.N * gx - state.M.transpose() * gx);
  Vector next = detail::apply_adjusted_step(w, gx, gy, adj_x, adj_y, cfg.eta);
  require_finite(next, "lrsga_step_explicit");

  if (auto pair = detail::secant_pair(game, w, next, cfg, batches)) {
    state.M += pair->p * (pair->y_f - state.M * pair->s_y) * pair->s_y.transpose();
    state.N += pair->p * (pair->y_g - state.N * pair->s_x) * pair->s_x.transpose();
  }
  return next;
}

// One LM-LRSGA step. The four products M d_y g, N^T d_y g, N d_x f, M^T d_x f
// come from the two-loop recursions over `history`; the new pair (optionally
// EMA-smoothed) is pushed afterwards.
inline Vector lmlrsga_step(const Game& game, const Vector& w, HistoryBuffer& history, EmaState* ema,
                           const OptimizerConfig& cfg, const StepBatches& batches = {}) {
  const GameDims dims = game.dims();
  if (history.dims() != dims) throw UsageError("lmlrsga_step: history does not match game dims");
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  const Vector field = evaluate_field(game, w, batches.current);
  const Vector gx = field.head(m);
  const Vector gy = field.tail(n);

  const Vector m_gy = two_loop_direct(history, Side::M, gy);
  require_finite(m_gy, "lmlrsga_step: M d_y g");
  const Vector nt_gy = two_loop_transpose(history, Side::N, gy);
  require_finite(nt_gy, "lmlrsga_step: N^T d_y g");
  const Vector n_gx = two_loop_direct(history, Side::N, gx);
  require_finite(n_gx, "lmlrsga_step: N d_x f");
  const Vector mt_gx = two_loop_transpose(history, Side::M, gx);
  require_finite(mt_gx, "lmlrsga_step: M^T d_x f");

  const Vector adj_x = 0.5 * cfg.tau * (m_gy - nt_gy);
  const Vector adj_y = 0.5 * cfg.tau * (n_gx - mt_gx);
  Vector next = detail::apply_adjusted_step(w, gx, gy, adj_x, adj_y, cfg.eta);
  require_finite(next, "lmlrsga_step");

  if (auto pair = detail::secant_pair(game, w, next, cfg, batches)) {
    if (ema != nullptr) ema->smooth(*pair);
    history.push(std::move(*pair));
  }
  return next;
}

struct AdamMoments {
  Vector first;
  Vector second;
  std::size_t t = 0;

  static AdamMoments zero(std::size_t d) {
    const auto k = static_cast<Eigen::Index>(d);
    return {Vector::Zero(k), Vector::Zero(k), 0};
  }
};

// Bias-corrected Adam on the joint field; both players move simultaneously.
inline Vector adam_step(const Game& game, const Vector& w, AdamMoments& moments, const OptimizerConfig& cfg,
                        const Batch* batch = nullptr) {
  const Vector g = evaluate_field(game, w, batch);
  if (moments.first.size() != g.size() || moments.second.size() != g.size()) {
    throw UsageError("adam_step: moments do not match game dims");
  }
  const AdamParams& a = cfg.adam;
  moments.t += 1;
  moments.first = a.beta1 * moments.first + (1.0 - a.beta1) * g;
  moments.second = a.beta2 * moments.second + (1.0 - a.beta2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(a.beta1, static_cast<double>(moments.t));
  const double c2 = 1.0 - std::pow(a.beta2, static_cast<double>(moments.t));
  const Vector m_hat = moments.first / c1;
  const Vector v_hat = moments.second / c2;
  Vector next = w - cfg.eta * m_hat.cwiseQuotient((v_hat.cwiseSqrt().array() + a.eps).matrix());
  require_finite(next, "adam_step");
  return next;
}

enum class OptimizerKind { simgd, sga, lrsga, lmlrsga, lmlrsga_ema, adam };

inline std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::simgd: return "simgd";
    case OptimizerKind::sga: return "sga";
    case OptimizerKind::lrsga: return "lrsga";
    case OptimizerKind::lmlrsga: return "lmlrsga";
    case OptimizerKind::lmlrsga_ema: return "lmlrsga_ema";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

inline std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name) {
  for (const auto kind : {OptimizerKind::simgd, OptimizerKind::sga, OptimizerKind::lrsga, OptimizerKind::lmlrsga,
                          OptimizerKind::lmlrsga_ema, OptimizerKind::adam}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

// Stateful optimizer owned by a single run.
class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual OptimizerKind kind() const = 0;
  virtual Vector step(const Game& game, const Vector& w, const StepBatches& batches) = 0;
};

namespace detail {

class SimGd final : public Optimizer {
 public:
  explicit SimGd(OptimizerConfig cfg) : cfg_(cfg) {}
  OptimizerKind kind() const override { return OptimizerKind::simgd; }
  Vector step(const Game& game, const Vector& w, const StepBatches& b) override {
    return simgd_step(game, w, cfg_.eta, b.current);
  }

 private:
  OptimizerConfig cfg_;
};

class Sga final : public Optimizer {
 public:
  explicit Sga(OptimizerConfig cfg) : cfg_(cfg) {}
  OptimizerKind kind() const override { return OptimizerKind::sga; }
  Vector step(const Game& game, const Vector& w, const StepBatches& b) override {
    return sga_step_exact(game, w, cfg_.eta, cfg_.tau, b.current, cfg_.sga_fd_fallback);
  }

 private:
  OptimizerConfig cfg_;
};

class ExplicitLrsga final : public Optimizer {
 public:
  ExplicitLrsga(OptimizerConfig cfg, GameDims dims) : cfg_(cfg), state_(ExplicitLrsgaState::zero(dims)) {}
  OptimizerKind kind() const override { return OptimizerKind::lrsga; }
  Vector step(const Game& game, const Vector& w, const StepBatches& b) override {
    return lrsga_step_explicit(game, w, state_, cfg_, b);
  }

 private:
  OptimizerConfig cfg_;
  ExplicitLrsgaState state_;
};

class LmLrsga final : public Optimizer {
 public:
  LmLrsga(OptimizerConfig cfg, GameDims dims, bool with_ema)
      : cfg_(cfg), history_(cfg.history, dims) {
    if (with_ema) ema_.emplace(cfg.beta, dims);
  }
  OptimizerKind kind() const override { return ema_ ? OptimizerKind::lmlrsga_ema : OptimizerKind::lmlrsga; }
  Vector step(const Game& game, const Vector& w, const StepBatches& b) override {
    return lmlrsga_step(game, w, history_, ema_ ? &*ema_ : nullptr, cfg_, b);
  }

 private:
  OptimizerConfig cfg_;
  HistoryBuffer history_;
  std::optional<EmaState> ema_;
};

class Adam final : public Optimizer {
 public:
  Adam(OptimizerConfig cfg, GameDims dims) : cfg_(cfg), moments_(AdamMoments::zero(dims.total())) {}
  OptimizerKind kind() const override { return OptimizerKind::adam; }
  Vector step(const Game& game, const Vector& w, const StepBatches& b) override {
    return adam_step(game, w, moments_, cfg_, b.current);
  }

 private:
  OptimizerConfig cfg_;
  AdamMoments moments_;
};

}  // namespace detail

inline std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind, const OptimizerConfig& cfg, GameDims dims) {
  cfg.validate();
  switch (kind) {
    case OptimizerKind::simgd: return std::make_unique<detail::SimGd>(cfg);
    case OptimizerKind::sga: return std::make_unique<detail::Sga>(cfg);
    case OptimizerKind::lrsga: return std::make_unique<detail::ExplicitLrsga>(cfg, dims);
    case OptimizerKind::lmlrsga: return std::make_unique<detail::LmLrsga>(cfg, dims, false);
    case OptimizerKind::lmlrsga_ema: return std::make_unique<detail::LmLrsga>(cfg, dims, true);
    case OptimizerKind::adam: return std::make_unique<detail::Adam>(cfg, dims);
  }
  throw UsageError("make_optimizer: unknown kind");
}

}  // namespace lmlrsga
