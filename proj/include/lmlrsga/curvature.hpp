#pragma once

// Limited-memory curvature store and the adapted two-loop recursions that
// apply the mixed-block secant estimates M_k (m x n, approximating d2xy f)
// and N_k (n x m, approximating d2yx g), or their transposes, to a vector
// without ever forming them.

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "lmlrsga/types.hpp"

namespace lmlrsga {

// Pairs whose joint step ||s_w||^2 falls below this are never stored.
inline constexpr double kDegenerateStepFloor = 1e-24;

struct CurvaturePair {
  Vector s_x;  // x_k - x_{k-1}
  Vector s_y;  // y_k - y_{k-1}
  Vector y_f;  // d_x f difference minus eps_x * s_x
  Vector y_g;  // d_y g difference minus eps_y * s_y
  double p = 0.0;  // 1 / ||s_w||^2

  double joint_step_sq() const { return s_x.squaredNorm() + s_y.squaredNorm(); }

  // Fills p from the steps; nullopt when the step is degenerate.
  static std::optional<CurvaturePair> from_steps(Vector s_x, Vector s_y, Vector y_f, Vector y_g) {
    if (s_x.size() != y_f.size() || s_y.size() != y_g.size()) {
      throw UsageError("CurvaturePair: step and gradient-difference lengths disagree");
    }
    const double sq = s_x.squaredNorm() + s_y.squaredNorm();
    if (!(sq >= kDegenerateStepFloor) || !std::isfinite(sq)) return std::nullopt;
    return CurvaturePair{std::move(s_x), std::move(s_y), std::move(y_f), std::move(y_g), 1.0 / sq};
  }
};

// Secant data from a realized step and the matching gradient differences
// (dgx = d_x f(w_next) - d_x f(w_prev), likewise dgy).
inline std::optional<CurvaturePair> make_pair_from_differences(const Vector& s_x, const Vector& s_y,
                                                               const Vector& dgx, const Vector& dgy,
                                                               double eps_x, double eps_y) {
  if (eps_x < 0.0 || eps_y < 0.0) throw UsageError("make_pair: eps_x and eps_y must be >= 0");
  if (s_x.size() != dgx.size() || s_y.size() != dgy.size()) throw UsageError("make_pair: dimension mismatch");
  return CurvaturePair::from_steps(s_x, s_y, dgx - eps_x * s_x, dgy - eps_y * s_y);
}

// w_* are stacked iterates and g_* stacked fields F(w_*).
inline std::optional<CurvaturePair> make_pair(const Vector& w_prev, const Vector& w_next, const Vector& g_prev,
                                              const Vector& g_next, GameDims dims, double eps_x, double eps_y) {
  for (const Vector* v : {&w_prev, &w_next, &g_prev, &g_next}) require_length(*v, dims.total(), "make_pair");
  const auto m = static_cast<Eigen::Index>(dims.m);
  const auto n = static_cast<Eigen::Index>(dims.n);
  const Vector step = w_next - w_prev;
  const Vector diff = g_next - g_prev;
  return make_pair_from_differences(step.head(m), step.tail(n), diff.head(m), diff.tail(n), eps_x, eps_y);
}

enum class PushResult { accepted, rejected_degenerate };

// FIFO of the most recent `capacity` pairs. The last evicted pair is kept as
// the seed of the rank-one base matrix H0.
class HistoryBuffer {
 public:
  HistoryBuffer(std::size_t capacity, GameDims dims) : capacity_(capacity), dims_(dims) {
    if (capacity_ < 1) throw UsageError("HistoryBuffer: capacity must be >= 1");
  }

  PushResult push(CurvaturePair pair) {
    if (static_cast<std::size_t>(pair.s_x.size()) != dims_.m || static_cast<std::size_t>(pair.y_f.size()) != dims_.m ||
        static_cast<std::size_t>(pair.s_y.size()) != dims_.n || static_cast<std::size_t>(pair.y_g.size()) != dims_.n) {
      throw UsageError("HistoryBuffer::push: pair does not match buffer dims");
    }
    const double sq = pair.joint_step_sq();
    if (!(sq >= kDegenerateStepFloor) || !std::isfinite(sq)) return PushResult::rejected_degenerate;
    if (!(pair.p > 0.0) || !std::isfinite(pair.p) || std::abs(pair.p * sq - 1.0) > 1e-12) {
      throw UsageError("HistoryBuffer::push: p must equal 1 / ||s_w||^2");
    }
    pairs_.push_back(std::move(pair));
    if (pairs_.size() > capacity_) {
      base_ = std::move(pairs_.front());
      pairs_.pop_front();
    }
    return PushResult::accepted;
  }

  void clear() {
    pairs_.clear();
    base_.reset();
  }

  // Oldest first.
  const std::deque<CurvaturePair>& pairs() const noexcept { return pairs_; }
  const std::optional<CurvaturePair>& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  bool empty() const noexcept { return pairs_.empty() && !base_; }
  GameDims dims() const noexcept { return dims_; }

  // Scalars held, for memory accounting.
  std::size_t stored_scalars() const noexcept {
    const std::size_t per_pair = 2 * dims_.m + 2 * dims_.n + 1;
    return (pairs_.size() + (base_ ? 1 : 0)) * per_pair;
  }

 private:
  std::size_t capacity_;
  GameDims dims_;
  std::deque<CurvaturePair> pairs_;
  std::optional<CurvaturePair> base_;
};

// M uses (s_y, y_f): M q takes q in R^n to R^m.
// N uses (s_x, y_g): N q takes q in R^m to R^n.
enum class Side { M, N };

struct SideView {
  const Vector& s;
  const Vector& y;
};

inline SideView side_view(const CurvaturePair& pair, Side side) {
  return side == Side::M ? SideView{pair.s_y, pair.y_f} : SideView{pair.s_x, pair.y_g};
}

namespace detail {
// (rows, cols) of the operator on `side`.
inline std::pair<std::size_t, std::size_t> operator_shape(GameDims dims, Side side) {
  return side == Side::M ? std::pair{dims.m, dims.n} : std::pair{dims.n, dims.m};
}
}  // namespace detail

// H0 q = y_b (s_b^T q) / ||s_b,joint||^2, zero when nothing was evicted yet.
inline Vector base_apply_direct(const HistoryBuffer& buf, Side side, const Vector& q) {
  const auto [rows, cols] = detail::operator_shape(buf.dims(), side);
  require_length(q, cols, "base_apply_direct");
  if (!buf.base()) return Vector::Zero(static_cast<Eigen::Index>(rows));
  const SideView v = side_view(*buf.base(), side);
  return (buf.base()->p * v.s.dot(q)) * v.y;
}

// H0^T q = s_b (y_b^T q) / ||s_b,joint||^2, the exact transpose of the above.
inline Vector base_apply_transpose(const HistoryBuffer& buf, Side side, const Vector& q) {
  const auto [rows, cols] = detail::operator_shape(buf.dims(), side);
  require_length(q, rows, "base_apply_transpose");
  if (!buf.base()) return Vector::Zero(static_cast<Eigen::Index>(cols));
  const SideView v = side_view(*buf.base(), side);
  return (buf.base()->p * v.y.dot(q)) * v.s;
}

// M_k q (or N_k q). The first loop runs newest to oldest, deflating a working
// copy of q by the projectors I - p_i s_i s_i^T; the second runs oldest to
// newest, accumulating y_i alpha_i on top of H0 applied to the deflated q.
inline Vector two_loop_direct(const HistoryBuffer& buf, Side side, const Vector& q) {
  [[maybe_unused]] const auto [rows, cols] = detail::operator_shape(buf.dims(), side);
  require_length(q, cols, "two_loop_direct");
  const auto& pairs = buf.pairs();
  std::vector<double> alpha(pairs.size());
  Vector work = q;
  for (std::size_t i = pairs.size(); i-- > 0;) {
    const SideView v = side_view(pairs[i], side);
    alpha[i] = pairs[i].p * v.s.dot(work);
    work.noalias() -= alpha[i] * v.s;
  }
  Vector r = base_apply_direct(buf, side, work);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    r.noalias() += alpha[i] * side_view(pairs[i], side).y;
  }
  return r;
}

// M_k^T q (or N_k^T q).
inline Vector two_loop_transpose(const HistoryBuffer& buf, Side side, const Vector& q) {
  [[maybe_unused]] const auto [rows, cols] = detail::operator_shape(buf.dims(), side);
  require_length(q, rows, "two_loop_transpose");
  const auto& pairs = buf.pairs();
  std::vector<double> alpha(pairs.size());
  for (std::size_t i = pairs.size(); i-- > 0;) {
    alpha[i] = pairs[i].p * side_view(pairs[i], side).y.dot(q);
  }
  Vector r = base_apply_transpose(buf, side, q);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const SideView v = side_view(pairs[i], side);
    const double beta = pairs[i].p * v.s.dot(r);
    r.noalias() += (alpha[i] - beta) * v.s;
  }
  return r;
}

// Exponential moving average of the gradient differences y_f, y_g.
// Averages start at zero.
class EmaState {
 public:
  EmaState(double beta, GameDims dims)
      : beta_(beta),
        y_f_(Vector::Zero(static_cast<Eigen::Index>(dims.m))),
        y_g_(Vector::Zero(static_cast<Eigen::Index>(dims.n))) {
    if (!(beta >= 0.0 && beta < 1.0)) throw UsageError("EmaState: beta must lie in [0, 1)");
  }

  void update(const Vector& y_f, const Vector& y_g) {
    require_length(y_f, static_cast<std::size_t>(y_f_.size()), "EmaState::update y_f");
    require_length(y_g, static_cast<std::size_t>(y_g_.size()), "EmaState::update y_g");
    y_f_ = beta_ * y_f_ + (1.0 - beta_) * y_f;
    y_g_ = beta_ * y_g_ + (1.0 - beta_) * y_g;
  }

  // Updates the averages with the pair's differences and replaces them by the
  // smoothed values.
  void smooth(CurvaturePair& pair) {
    update(pair.y_f, pair.y_g);
    pair.y_f = y_f_;
    pair.y_g = y_g_;
  }

  double beta() const noexcept { return beta_; }
  const Vector& y_f() const noexcept { return y_f_; }
  const Vector& y_g() const noexcept { return y_g_; }

 private:
  double beta_;
  Vector y_f_;
  Vector y_g_;
};

inline EmaState ema_update(EmaState state, const Vector& y_f, const Vector& y_g) {
  state.update(y_f, y_g);
  return state;
}

}  // namespace lmlrsga
