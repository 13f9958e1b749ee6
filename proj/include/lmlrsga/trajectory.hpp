#pragma once

// Recorded optimizer trajectories and their CSV form:
//   k,loss_f,loss_g,w_0,...,w_{d-1}        (full state)
//   k,loss_f,loss_g,norm_x,norm_y          (norm-only logging)
// Numbers are written with 17 significant digits; absent losses as "nan".

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "lmlrsga/types.hpp"

namespace lmlrsga {

struct Snapshot {
  std::size_t k = 0;
  double loss_f = std::numeric_limits<double>::quiet_NaN();
  double loss_g = std::numeric_limits<double>::quiet_NaN();
  Vector w;  // full iterate, or (||x||, ||y||) for norm-only logs
};

class TrajectoryLog {
 public:
  TrajectoryLog(GameDims dims, bool full_state = true, std::size_t stride = 1)
      : dims_(dims), full_state_(full_state), stride_(stride) {
    if (stride_ < 1) throw UsageError("TrajectoryLog: stride must be >= 1");
  }

  // Records iterate k if it falls on the stride. `w` is always the full iterate.
  void record(std::size_t k, const Vector& w, double loss_f, double loss_g) {
    if (k % stride_ != 0) return;
    append(k, w, loss_f, loss_g);
  }

  // Unconditional append of an already-reduced snapshot (used by readers and
  // by callers that thin the trajectory themselves).
  void append(std::size_t k, const Vector& w, double loss_f, double loss_g) {
    if (!snapshots_.empty() && k <= snapshots_.back().k) {
      throw UsageError("TrajectoryLog: iterations must be strictly increasing");
    }
    require_finite(w, "TrajectoryLog");
    Snapshot snap{k, loss_f, loss_g, {}};
    if (full_state_) {
      require_length(w, dims_.total(), "TrajectoryLog");
      snap.w = w;
    } else if (static_cast<std::size_t>(w.size()) == dims_.total()) {
      snap.w = Vector(2);
      snap.w << w.head(static_cast<Eigen::Index>(dims_.m)).norm(), w.tail(static_cast<Eigen::Index>(dims_.n)).norm();
    } else {
      require_length(w, 2, "TrajectoryLog (norm-only)");
      snap.w = w;
    }
    snapshots_.push_back(std::move(snap));
  }

  const std::vector<Snapshot>& snapshots() const noexcept { return snapshots_; }
  std::size_t size() const noexcept { return snapshots_.size(); }
  bool empty() const noexcept { return snapshots_.empty(); }
  GameDims dims() const noexcept { return dims_; }
  bool full_state() const noexcept { return full_state_; }
  std::size_t stride() const noexcept { return stride_; }

  // Columns are snapshots, oldest first.
  Matrix state_matrix() const {
    if (!full_state_) throw UsageError("TrajectoryLog: norm-only log has no state matrix");
    Matrix out(static_cast<Eigen::Index>(dims_.total()), static_cast<Eigen::Index>(snapshots_.size()));
    for (std::size_t j = 0; j < snapshots_.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = snapshots_[j].w;
    return out;
  }

  std::vector<double> losses_f() const { return collect(&Snapshot::loss_f); }
  std::vector<double> losses_g() const { return collect(&Snapshot::loss_g); }

 private:
  std::vector<double> collect(double Snapshot::*field) const {
    std::vector<double> out;
    out.reserve(snapshots_.size());
    for (const auto& s : snapshots_) out.push_back(s.*field);
    return out;
  }

  GameDims dims_;
  bool full_state_;
  std::size_t stride_;
  std::vector<Snapshot> snapshots_;
};

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& text) {
  std::size_t b = text.find_first_not_of(" \t\r");
  std::size_t e = text.find_last_not_of(" \t\r");
  if (b == std::string::npos) throw IoError("trajectory CSV: empty numeric field");
  const std::string field = text.substr(b, e - b + 1);
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) throw IoError("trajectory CSV: bad number '" + field + "'");
  return v;
}

inline void write_trajectory_csv(const TrajectoryLog& log, std::ostream& out) {
  out << "k,loss_f,loss_g";
  if (log.full_state()) {
    for (std::size_t i = 0; i < log.dims().total(); ++i) out << ",w_" << i;
  } else {
    out << ",norm_x,norm_y";
  }
  out << '\n';
  for (const auto& s : log.snapshots()) {
    out << s.k << ',' << format_double(s.loss_f) << ',' << format_double(s.loss_g);
    for (Eigen::Index i = 0; i < s.w.size(); ++i) out << ',' << format_double(s.w[i]);
    out << '\n';
  }
}

inline void write_trajectory_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_trajectory_csv(log, out);
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}
}  // namespace detail

// Reads either CSV flavour. `dims` must match the number of state columns of a
// full-state file.
inline TrajectoryLog read_trajectory_csv(std::istream& in, GameDims dims) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("trajectory CSV: missing header");
  std::vector<std::string> header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);
  if (header.size() < 4 || header[0] != "k" || header[1] != "loss_f" || header[2] != "loss_g") {
    throw IoError("trajectory CSV: header must start with k,loss_f,loss_g");
  }
  const bool norm_only = header.size() == 5 && header[3] == "norm_x" && header[4] == "norm_y";
  if (!norm_only) {
    if (header.size() - 3 != dims.total()) {
      throw UsageError("trajectory CSV: " + std::to_string(header.size() - 3) + " state columns but dims give " +
                       std::to_string(dims.total()));
    }
    for (std::size_t i = 3; i < header.size(); ++i) {
      if (header[i] != "w_" + std::to_string(i - 3)) throw IoError("trajectory CSV: unexpected column '" + header[i] + "'");
    }
  }
  TrajectoryLog log(dims, !norm_only);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw IoError("trajectory CSV: line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(header.size()));
    }
    const double kd = parse_double(fields[0]);
    if (kd < 0 || kd != std::floor(kd)) throw IoError("trajectory CSV: bad iteration index on line " + std::to_string(line_no));
    Vector w(static_cast<Eigen::Index>(fields.size() - 3));
    for (std::size_t i = 3; i < fields.size(); ++i) w[static_cast<Eigen::Index>(i - 3)] = parse_double(fields[i]);
    log.append(static_cast<std::size_t>(kd), w, parse_double(fields[1]), parse_double(fields[2]));
  }
  return log;
}

inline TrajectoryLog read_trajectory_csv(const std::string& path, GameDims dims) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_trajectory_csv(in, dims);
}

}  // namespace lmlrsga
