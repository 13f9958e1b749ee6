#pragma once

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "lmlrsga/types.hpp"

namespace lmlrsga {

// Reproducible handle for one mini-batch: the same (seed, index) always
// re-materializes the same sample indices.
struct BatchToken {
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

// Sorted sample indices into a game's data pool. Deterministic games never
// look at it.
struct Batch {
  std::vector<std::size_t> indices;

  bool empty() const noexcept { return indices.empty(); }
};

inline Batch intersect(const Batch& a, const Batch& b) {
  Batch out;
  std::set_intersection(a.indices.begin(), a.indices.end(), b.indices.begin(), b.indices.end(),
                        std::back_inserter(out.indices));
  return out;
}

// Closed-form mixed second derivatives: d2xy f is m x n, d2yx g is n x m.
struct MixedBlocks {
  Matrix dxy_f;
  Matrix dyx_g;
};

// A two-player differentiable game. Player 1 minimizes f over x, player 2
// minimizes g over y; w = (x, y) is always passed stacked. `batch` may be
// null, meaning the full data (or no data, for deterministic games).
class Game {
 public:
  virtual ~Game() = default;

  virtual std::string name() const = 0;
  virtual GameDims dims() const = 0;

  virtual Vector grad_x_f(const Vector& w, const Batch* batch) const = 0;
  virtual Vector grad_y_g(const Vector& w, const Batch* batch) const = 0;

  virtual std::optional<double> loss_f(const Vector& /*w*/, const Batch* /*batch*/) const {
    return std::nullopt;
  }
  virtual std::optional<double> loss_g(const Vector& /*w*/, const Batch* /*batch*/) const {
    return std::nullopt;
  }

  virtual bool stochastic() const { return false; }
  virtual Batch sample_batch(BatchToken /*token*/) const { return {}; }

  // Only games with analytic mixed blocks override this.
  virtual std::optional<MixedBlocks> mixed_blocks(const Vector& /*w*/) const { return std::nullopt; }
};

// F(w) = (d_x f(w), d_y g(w)).
inline Vector evaluate_field(const Game& game, const Vector& w, const Batch* batch = nullptr) {
  const GameDims dims = game.dims();
  require_length(w, dims.total(), "evaluate_field");
  Vector gx = game.grad_x_f(w, batch);
  Vector gy = game.grad_y_g(w, batch);
  require_length(gx, dims.m, "evaluate_field: grad_x_f");
  require_length(gy, dims.n, "evaluate_field: grad_y_g");
  Vector field(dims.total());
  field << gx, gy;
  require_finite(field, "evaluate_field");
  return field;
}

inline Vector evaluate_field(const Game& game, const JointIterate& w, const Batch* batch = nullptr) {
  if (w.dims() != game.dims()) throw UsageError("evaluate_field: iterate does not match game dims");
  return evaluate_field(game, w.stack(), batch);
}

inline constexpr double kDefaultFdStep = 1e-5;

// Central-difference Jacobian of F. Column j is (F(w + h e_j) - F(w - h e_j)) / 2h.
inline Matrix fd_game_hessian(const Game& game, const Vector& w, double h = kDefaultFdStep,
                              const Batch* batch = nullptr) {
  if (!(h > 0.0)) throw UsageError("fd_game_hessian: step must be positive");
  const auto d = static_cast<Eigen::Index>(game.dims().total());
  require_length(w, static_cast<std::size_t>(d), "fd_game_hessian");
  Matrix hess(d, d);
  Vector probe = w;
  for (Eigen::Index j = 0; j < d; ++j) {
    probe[j] = w[j] + h;
    const Vector plus = evaluate_field(game, probe, batch);
    probe[j] = w[j] - h;
    const Vector minus = evaluate_field(game, probe, batch);
    probe[j] = w[j];
    hess.col(j) = (plus - minus) / (2.0 * h);
  }
  if (!hess.allFinite()) throw NumericalError("fd_game_hessian: non-finite entry");
  return hess;
}

struct SymmetricSplit {
  Matrix symmetric;
  Matrix antisymmetric;
};

// H = S + A with S = (H + H^T)/2, A = (H - H^T)/2.
inline SymmetricSplit split_symmetric_antisymmetric(const Matrix& hess) {
  if (hess.rows() != hess.cols()) throw UsageError("split_symmetric_antisymmetric: matrix is not square");
  const Matrix t = hess.transpose();
  // The diagonal is exact (A_ii = 0). Off-diagonal S + A reproduces H up to
  // one rounding of (h_ij +- h_ji); exact whenever both sums are exact.
  SymmetricSplit out{0.5 * (hess + t), 0.5 * (hess - t)};
  return out;
}

}  // namespace lmlrsga
