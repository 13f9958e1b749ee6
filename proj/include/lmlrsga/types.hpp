#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "lmlrsga/errors.hpp"

namespace lmlrsga {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct GameDims {
  std::size_t m = 1;  // player 1 (x)
  std::size_t n = 1;  // player 2 (y)

  GameDims() = default;
  GameDims(std::size_t m_, std::size_t n_) : m(m_), n(n_) {
    if (m == 0 || n == 0) throw UsageError("GameDims: both player dimensions must be >= 1");
  }

  std::size_t total() const noexcept { return m + n; }
  bool operator==(const GameDims&) const = default;
};

inline void require_length(const Vector& v, std::size_t len, const char* what) {
  if (static_cast<std::size_t>(v.size()) != len) {
    throw UsageError(std::string(what) + ": expected length " + std::to_string(len) + ", got " +
                     std::to_string(v.size()));
  }
}

// Throws NumericalError pointing at the first non-finite entry.
inline void require_finite(const Vector& v, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw NumericalError(std::string(what) + ": non-finite value", static_cast<std::size_t>(i));
    }
  }
}

// The stacked strategy w = (x, y).
class JointIterate {
 public:
  JointIterate(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() == 0 || y_.size() == 0) throw UsageError("JointIterate: empty player block");
  }

  static JointIterate unstack(const Vector& w, GameDims dims) {
    require_length(w, dims.total(), "JointIterate::unstack");
    const auto m = static_cast<Eigen::Index>(dims.m);
    const auto n = static_cast<Eigen::Index>(dims.n);
    return JointIterate(w.head(m), w.tail(n));
  }

  Vector stack() const {
    Vector w(x_.size() + y_.size());
    w << x_, y_;
    return w;
  }

  const Vector& x() const noexcept { return x_; }
  const Vector& y() const noexcept { return y_; }
  GameDims dims() const {
    return GameDims(static_cast<std::size_t>(x_.size()), static_cast<std::size_t>(y_.size()));
  }
  bool all_finite() const { return x_.allFinite() && y_.allFinite(); }

 private:
  Vector x_;
  Vector y_;
};

}  // namespace lmlrsga
