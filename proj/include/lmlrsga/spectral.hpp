#pragma once

// Trajectory diagnostics: least-squares fit of a reduced linear transition
// operator, its spectrum and spectral radius, stability classification with a
// tolerance band refined by Welch PSD, and auxiliary stability indices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include "lmlrsga/trajectory.hpp"

namespace lmlrsga {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Reduced operator fit

struct ReducedOperator {
  Matrix op;     // r x r restriction U_r^T Y V_r Sigma_r^{-1}
  Matrix basis;  // d x r, U_r
  Vector singular_values;  // all singular values of X
  std::size_t requested_rank = 0;
  std::size_t effective_rank = 0;
};

// Relative floor below which singular values count as rank deficiency.
inline constexpr double kRankFloor = 1e-12;

// `snapshots` holds w_0..w_K as columns. X = [w_0..w_{K-1}], Y = [w_1..w_K].
inline ReducedOperator fit_reduced_operator(const Matrix& snapshots, std::size_t rank, bool center = false) {
  const Eigen::Index d = snapshots.rows();
  const Eigen::Index count = snapshots.cols();
  if (rank < 1) throw UsageError("fit_reduced_operator: rank must be >= 1");
  if (count < static_cast<Eigen::Index>(rank) + 1) {
    throw UsageError("fit_reduced_operator: need at least rank + 1 snapshots");
  }
  Matrix X = snapshots.leftCols(count - 1);
  Matrix Y = snapshots.rightCols(count - 1);
  if (center) {
    const Vector mean = X.rowwise().mean();
    X.colwise() -= mean;
    Y.colwise() -= mean;
  }
  ReducedOperator out;
  out.requested_rank = rank;
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.singular_values = svd.singularValues();
  const Vector& sigma = out.singular_values;
  const auto cap = std::min<Eigen::Index>(static_cast<Eigen::Index>(rank), std::min(d, count - 1));
  Eigen::Index r = 0;
  if (sigma.size() > 0 && sigma[0] > 0.0) {
    while (r < cap && sigma[r] >= kRankFloor * sigma[0]) ++r;
  }
  out.effective_rank = static_cast<std::size_t>(r);
  out.basis = svd.matrixU().leftCols(r);
  const Matrix v = svd.matrixV().leftCols(r);
  const Vector inv_sigma = sigma.head(r).cwiseInverse();
  out.op = out.basis.transpose() * (Y * v) * inv_sigma.asDiagonal();
  return out;
}

inline ReducedOperator fit_reduced_operator(const TrajectoryLog& log, std::size_t rank, bool center = false) {
  return fit_reduced_operator(log.state_matrix(), rank, center);
}

// ---------------------------------------------------------------------------
// Eigenvalues

struct EigenOptions {
  bool iterative = false;   // Arnoldi path; dense otherwise
  std::size_t leading = 5;  // Ritz values that must converge
  std::size_t krylov_dim = 20;
  double tolerance = 1e-10;
  std::uint64_t seed = 12345;
};

struct EigenResult {
  std::vector<Complex> values;  // descending modulus
  bool iterative = false;
  bool fell_back = false;  // iterative path broke down, dense used instead
};

inline void sort_by_modulus(std::vector<Complex>& values) {
  std::sort(values.begin(), values.end(), [](const Complex& a, const Complex& b) {
    const double ma = std::abs(a);
    const double mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

inline std::vector<Complex> dense_eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw UsageError("dominant_eigenvalues: matrix is not square");
  std::vector<Complex> out;
  if (a.rows() == 0) return out;
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) throw NumericalError("dominant_eigenvalues: dense eigensolver failed");
  const auto& ev = solver.eigenvalues();
  out.assign(ev.data(), ev.data() + ev.size());
  sort_by_modulus(out);
  return out;
}

namespace detail {

// Arnoldi with full reorthogonalization. Returns nullopt on breakdown before
// the Krylov space reaches full dimension.
inline std::optional<std::vector<Complex>> arnoldi_ritz_values(const Matrix& a, const EigenOptions& opt) {
  const Eigen::Index n = a.rows();
  Eigen::Index k = std::min<Eigen::Index>(n, std::max<Eigen::Index>(static_cast<Eigen::Index>(opt.krylov_dim),
                                                                     2 * static_cast<Eigen::Index>(opt.leading) + 1));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Vector start(n);
  for (Eigen::Index i = 0; i < n; ++i) start[i] = normal(rng);
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  while (true) {
    Matrix basis = Matrix::Zero(n, k + 1);
    Matrix hess = Matrix::Zero(k + 1, k);
    basis.col(0) = start.normalized();
    Eigen::Index built = k;
    for (Eigen::Index j = 0; j < k; ++j) {
      Vector v = a * basis.col(j);
      for (int pass = 0; pass < 2; ++pass) {
        const Vector coeffs = basis.leftCols(j + 1).transpose() * v;
        v -= basis.leftCols(j + 1) * coeffs;
        hess.col(j).head(j + 1) += coeffs;
      }
      const double h = v.norm();
      hess(j + 1, j) = h;
      if (h <= 1e-13 * scale) {
        built = j + 1;
        break;
      }
      basis.col(j + 1) = v / h;
    }
    if (built < k && built < n) return std::nullopt;

    const Matrix square = hess.topLeftCorner(built, built);
    Eigen::EigenSolver<Matrix> solver(square, true);
    if (solver.info() != Eigen::Success) return std::nullopt;
    if (built == n) {
      std::vector<Complex> out(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
      sort_by_modulus(out);
      return out;
    }
    // Ritz residual |h_{k+1,k}| |e_k^T y_i| for the leading values.
    std::vector<std::pair<Complex, double>> ritz;
    const double tail = hess(built, built - 1);
    for (Eigen::Index i = 0; i < built; ++i) {
      const auto vec = solver.eigenvectors().col(i);
      ritz.emplace_back(solver.eigenvalues()[i], tail * std::abs(vec[built - 1]) / vec.norm());
    }
    std::sort(ritz.begin(), ritz.end(), [](const auto& x, const auto& y) { return std::abs(x.first) > std::abs(y.first); });
    bool converged = true;
    const std::size_t lead = std::min<std::size_t>(opt.leading, ritz.size());
    for (std::size_t i = 0; i < lead; ++i) converged = converged && ritz[i].second <= opt.tolerance * scale;
    if (converged) {
      std::vector<Complex> out;
      for (std::size_t i = 0; i < lead; ++i) out.push_back(ritz[i].first);
      sort_by_modulus(out);
      return out;
    }
    k = std::min<Eigen::Index>(n, 2 * k);
  }
}

}  // namespace detail

// Eigenvalues sorted by modulus, largest first. The dense solver returns all
// of them; the iterative path returns the converged leading Ritz values (all
// of them when the Krylov space fills the whole space).
inline EigenResult dominant_eigenvalues(const Matrix& a, const EigenOptions& opt = {}) {
  if (a.rows() != a.cols()) throw UsageError("dominant_eigenvalues: matrix is not square");
  EigenResult out;
  if (opt.iterative && a.rows() > 0) {
    if (auto values = detail::arnoldi_ritz_values(a, opt)) {
      out.values = std::move(*values);
      out.iterative = true;
      return out;
    }
    out.fell_back = true;
  }
  out.values = dense_eigenvalues(a);
  return out;
}

inline double spectral_radius(std::span<const Complex> values) {
  double rho = 0.0;
  for (const auto& v : values) rho = std::max(rho, std::abs(v));
  return rho;
}

// ---------------------------------------------------------------------------
// Welch PSD

// none: each segment's mean is kept as an exact line at f = 0 (the window is
//       applied to the fluctuation only, so DC does not leak into f > 0);
// constant: the segment mean is discarded.
enum class Detrend { none, constant };

struct WelchOptions {
  std::size_t window_len = 256;
  double overlap = 0.5;  // fraction of window_len
  Detrend detrend = Detrend::none;
};

struct PsdResult {
  std::vector<double> frequencies;  // cycles per iteration, 0..0.5
  std::vector<double> power;        // one-sided density
  std::size_t window_len = 0;
  bool window_shrunk = false;
};

// Periodic Hann window.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  const double pi = std::acos(-1.0);
  for (std::size_t i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

inline PsdResult welch_psd(std::span<const double> signal, const WelchOptions& opt = {}) {
  if (!(opt.overlap >= 0.0 && opt.overlap < 1.0)) throw UsageError("welch_psd: overlap must lie in [0, 1)");
  if (signal.size() < 8) throw UsageError("welch_psd: series must have at least 8 samples");
  PsdResult out;
  std::size_t nperseg = std::max<std::size_t>(opt.window_len, 8);
  if (nperseg > signal.size()) {
    nperseg = signal.size();
    out.window_shrunk = true;
  }
  out.window_len = nperseg;
  const auto noverlap = static_cast<std::size_t>(std::floor(opt.overlap * static_cast<double>(nperseg)));
  const std::size_t hop = std::max<std::size_t>(1, nperseg - noverlap);
  const std::vector<double> window = hann_window(nperseg);
  const double window_energy = std::inner_product(window.begin(), window.end(), window.begin(), 0.0);

  const std::size_t bins = nperseg / 2 + 1;
  std::vector<double> acc(bins, 0.0);
  std::size_t segments = 0;
  Eigen::FFT<double> fft;
  std::vector<double> frame(nperseg);
  std::vector<Complex> spectrum;
  for (std::size_t start = 0; start + nperseg <= signal.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < nperseg; ++i) mean += signal[start + i];
    mean /= static_cast<double>(nperseg);
    for (std::size_t i = 0; i < nperseg; ++i) frame[i] = (signal[start + i] - mean) * window[i];
    fft.fwd(spectrum, frame);
    for (std::size_t b = 0; b < bins; ++b) acc[b] += std::norm(spectrum[b]);
    // Same density as a rectangular-window periodogram of the constant part.
    if (opt.detrend == Detrend::none) acc[0] += mean * mean * static_cast<double>(nperseg) * window_energy;
    ++segments;
  }
  out.frequencies.resize(bins);
  out.power.resize(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    double p = acc[b] / (static_cast<double>(segments) * window_energy);
    const bool nyquist = nperseg % 2 == 0 && b == bins - 1;
    if (b != 0 && !nyquist) p *= 2.0;
    out.frequencies[b] = static_cast<double>(b) / static_cast<double>(nperseg);
    out.power[b] = p;
  }
  return out;
}

// Share of non-DC power above `cutoff` (cycles/iteration), after removing each
// segment's mean. Zero when the series carries no non-DC power.
inline double high_frequency_power_ratio(std::span<const double> series, double cutoff, WelchOptions opt = {}) {
  opt.detrend = Detrend::constant;
  const PsdResult psd = welch_psd(series, opt);
  double total = 0.0;
  double high = 0.0;
  for (std::size_t b = 1; b < psd.power.size(); ++b) {
    total += psd.power[b];
    if (psd.frequencies[b] > cutoff) high += psd.power[b];
  }
  double mean_square = 0.0;
  for (const double v : series) mean_square += v * v;
  mean_square /= static_cast<double>(series.size());
  if (!(total > 1e-24 * std::max(mean_square, 1e-300))) return 0.0;
  return std::clamp(high / total, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Classification

enum class StabilityClass { stable, marginal, unstable };

inline std::string to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::stable: return "stable";
    case StabilityClass::marginal: return "marginal";
    case StabilityClass::unstable: return "unstable";
  }
  return "?";
}

inline std::optional<StabilityClass> parse_stability_class(const std::string& s) {
  for (auto c : {StabilityClass::stable, StabilityClass::marginal, StabilityClass::unstable}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

struct ClassifyOptions {
  double eps = 0.05;
  double hf_cutoff = 0.1;
  double hf_ratio_threshold = 0.2;
  std::size_t welch_window = 256;
  // Inside the band, a smooth trajectory with rho < 1 is still contracting and
  // is reported as stable; with this off every smooth in-band case is marginal.
  bool contracting_band_is_stable = true;
};

struct Classification {
  StabilityClass stability = StabilityClass::unstable;
  std::optional<double> hf_ratio;  // max over the usable loss series
};

namespace detail {
inline bool usable_series(std::span<const double> s) {
  return s.size() >= 8 && std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
}
}  // namespace detail

// High-frequency power ratio of the loss series (max over f and g), if any is usable.
inline std::optional<double> loss_hf_ratio(std::span<const double> loss_f, std::span<const double> loss_g,
                                           const ClassifyOptions& opt) {
  std::optional<double> ratio;
  WelchOptions welch;
  welch.window_len = opt.welch_window;
  for (auto series : {loss_f, loss_g}) {
    if (!detail::usable_series(series)) continue;
    const double r = high_frequency_power_ratio(series, opt.hf_cutoff, welch);
    ratio = ratio ? std::max(*ratio, r) : r;
  }
  return ratio;
}

// rho < 1 - eps: stable; rho > 1 + eps: unstable; inside the band the loss
// series decide: a large high-frequency share (or no usable loss series)
// means unstable, otherwise marginal, or stable when rho < 1 and
// contracting_band_is_stable is set.
inline Classification classify_stability(double rho, std::span<const double> loss_f, std::span<const double> loss_g,
                                         const ClassifyOptions& opt = {}) {
  if (!(opt.eps > 0.0)) throw UsageError("classify_stability: eps must be > 0");
  if (!(opt.hf_cutoff > 0.0 && opt.hf_cutoff < 0.5)) throw UsageError("classify_stability: hf_cutoff must lie in (0, 0.5)");
  Classification out;
  out.hf_ratio = loss_hf_ratio(loss_f, loss_g, opt);
  if (rho < 1.0 - opt.eps) {
    out.stability = StabilityClass::stable;
  } else if (rho > 1.0 + opt.eps) {
    out.stability = StabilityClass::unstable;
  } else {
    const bool smooth = out.hf_ratio && *out.hf_ratio <= opt.hf_ratio_threshold;
    if (!smooth) {
      out.stability = StabilityClass::unstable;
    } else {
      out.stability = rho < 1.0 && opt.contracting_band_is_stable ? StabilityClass::stable : StabilityClass::marginal;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Auxiliary indices

// Map a nonnegative variability onto (0, 1].
inline double normalize_variability(double sigma) { return 1.0 / (1.0 + sigma); }

namespace detail {
inline double population_std(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double acc = 0.0;
  for (const double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

// Window starts for sliding windows of `window` over `count` items; a single
// window covering everything when count < window.
inline std::vector<std::pair<std::size_t, std::size_t>> sliding_windows(std::size_t count, std::size_t window) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (count == 0) return out;
  const std::size_t len = std::min(count, window);
  for (std::size_t s = 0; s + len <= count; ++s) out.emplace_back(s, len);
  return out;
}

inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2) return 0.0;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}
}  // namespace detail

// 1 / (1 + mean within-window standard deviation of the loss).
inline double loss_stability_index(std::span<const double> losses, std::size_t window) {
  if (window < 2) throw UsageError("loss_stability_index: window must be >= 2");
  const auto windows = detail::sliding_windows(losses.size(), window);
  if (windows.empty() || losses.size() < 2) return 1.0;
  double total = 0.0;
  for (const auto& [start, len] : windows) total += detail::population_std(losses.subspan(start, len));
  return normalize_variability(total / static_cast<double>(windows.size()));
}

struct ModeCollapseTrend {
  double slope = 0.0;  // least-squares slope of generator variance per iteration
  bool high = false;   // slope < -threshold
  bool temporal_variance = false;  // m == 1: variance taken over time windows
};

// Trend of the generator-parameter spread. For m >= 2 the per-snapshot
// variance across the first m coordinates is smoothed by a moving average of
// `window` snapshots; for m == 1 the variance of theta_G over each window is
// used instead. The slope is fitted against the iteration index.
inline ModeCollapseTrend mode_collapse_trend(const TrajectoryLog& log, std::size_t window, double threshold = 1e-4) {
  if (window < 1) throw UsageError("mode_collapse_trend: window must be >= 1");
  if (!log.full_state()) throw UsageError("mode_collapse_trend: needs full-state snapshots");
  const auto& snaps = log.snapshots();
  const auto m = static_cast<Eigen::Index>(log.dims().m);
  ModeCollapseTrend out;
  out.temporal_variance = m == 1;
  std::vector<double> xs;
  std::vector<double> ys;
  if (m >= 2) {
    std::vector<double> var(snaps.size());
    for (std::size_t i = 0; i < snaps.size(); ++i) {
      const auto g = snaps[i].w.head(m);
      var[i] = (g.array() - g.mean()).square().mean();
    }
    for (const auto& [start, len] : detail::sliding_windows(snaps.size(), window)) {
      double v = 0.0;
      double k = 0.0;
      for (std::size_t j = start; j < start + len; ++j) {
        v += var[j];
        k += static_cast<double>(snaps[j].k);
      }
      xs.push_back(k / static_cast<double>(len));
      ys.push_back(v / static_cast<double>(len));
    }
  } else {
    std::vector<double> theta(snaps.size());
    for (std::size_t i = 0; i < snaps.size(); ++i) theta[i] = snaps[i].w[0];
    for (const auto& [start, len] : detail::sliding_windows(snaps.size(), std::max<std::size_t>(window, 2))) {
      const double s = detail::population_std(std::span<const double>(theta).subspan(start, len));
      double k = 0.0;
      for (std::size_t j = start; j < start + len; ++j) k += static_cast<double>(snaps[j].k);
      xs.push_back(k / static_cast<double>(len));
      ys.push_back(s * s);
    }
  }
  out.slope = detail::least_squares_slope(xs, ys);
  out.high = out.slope < -threshold;
  return out;
}

// 1 / (1 + mean over windows of the RMS distance of the iterates from the
// window mean).
inline double global_stability_index(const TrajectoryLog& log, std::size_t window) {
  if (window < 2) throw UsageError("global_stability_index: window must be >= 2");
  const auto& snaps = log.snapshots();
  const auto windows = detail::sliding_windows(snaps.size(), window);
  if (windows.empty()) return 1.0;
  double total = 0.0;
  for (const auto& [start, len] : windows) {
    Vector mean = Vector::Zero(snaps[start].w.size());
    for (std::size_t j = start; j < start + len; ++j) mean += snaps[j].w;
    mean /= static_cast<double>(len);
    double acc = 0.0;
    for (std::size_t j = start; j < start + len; ++j) acc += (snaps[j].w - mean).squaredNorm();
    total += std::sqrt(acc / static_cast<double>(len));
  }
  return normalize_variability(total / static_cast<double>(windows.size()));
}

// ---------------------------------------------------------------------------
// Full pipeline

struct SpectralParams {
  std::size_t rank = 40;
  double eps = 0.05;
  double hf_cutoff = 0.1;
  double hf_ratio_threshold = 0.2;
  std::size_t welch_window = 256;
  std::size_t loss_window = 20;
  std::size_t stability_window = 20;
  std::size_t collapse_window = 20;
  double collapse_threshold = 1e-4;
  bool center = false;
  bool iterative = false;
  bool contracting_band_is_stable = true;

  void validate() const {
    if (rank < 1) throw UsageError("spectral: rank must be >= 1");
    if (!(eps > 0.0)) throw UsageError("spectral: eps must be > 0");
    if (!(hf_cutoff > 0.0 && hf_cutoff < 0.5)) throw UsageError("spectral: hf_cutoff must lie in (0, 0.5)");
    if (!(hf_ratio_threshold >= 0.0 && hf_ratio_threshold <= 1.0)) {
      throw UsageError("spectral: hf_ratio_threshold must lie in [0, 1]");
    }
    if (welch_window < 8) throw UsageError("spectral: welch_window must be >= 8");
    if (loss_window < 2 || stability_window < 2 || collapse_window < 1) {
      throw UsageError("spectral: windows too small");
    }
  }
};

struct SpectralReport {
  std::vector<Complex> eigenvalues;
  std::optional<double> spectral_radius;
  std::optional<StabilityClass> stability_class;
  std::optional<double> high_freq_power_ratio;
  std::optional<double> loss_stability;
  std::optional<double> mode_collapse_trend;
  std::optional<bool> mode_collapse_high;
  std::optional<double> global_stability;
  std::size_t requested_rank = 0;
  std::size_t rank = 0;
  double eps = 0.05;
  std::vector<std::string> flags;    // warnings raised along the way
  std::vector<std::string> missing;  // fields that could not be computed
};

inline SpectralReport analyze(const TrajectoryLog& log, const SpectralParams& params = {}) {
  params.validate();
  SpectralReport report;
  report.requested_rank = params.rank;
  report.eps = params.eps;

  const std::vector<double> lf = log.losses_f();
  const std::vector<double> lg = log.losses_g();

  if (!log.full_state()) {
    report.flags.emplace_back("norm_only_log");
  } else if (log.size() < 2) {
    report.flags.emplace_back("too_few_snapshots");
  } else {
    const std::size_t cap = std::min<std::size_t>(params.rank, std::min(log.dims().total(), log.size() - 1));
    if (cap < params.rank) report.flags.emplace_back("rank_capped");
    const ReducedOperator fit = fit_reduced_operator(log, cap, params.center);
    report.rank = fit.effective_rank;
    if (fit.effective_rank < cap) report.flags.emplace_back("rank_deficient");
    if (fit.effective_rank == 0) report.flags.emplace_back("zero_trajectory");
    EigenOptions eig_opt;
    eig_opt.iterative = params.iterative;
    const EigenResult eig = dominant_eigenvalues(fit.op, eig_opt);
    if (eig.fell_back) report.flags.emplace_back("iterative_eigensolver_fallback");
    report.eigenvalues = eig.values;
    report.spectral_radius = spectral_radius(report.eigenvalues);
  }

  ClassifyOptions copt{params.eps, params.hf_cutoff, params.hf_ratio_threshold, params.welch_window,
                       params.contracting_band_is_stable};
  for (const auto* series : {&lf, &lg}) {
    if (series->size() >= 8 && series->size() < params.welch_window) {
      report.flags.emplace_back("welch_window_shrunk");
      break;
    }
  }
  report.high_freq_power_ratio = loss_hf_ratio(lf, lg, copt);
  if (report.spectral_radius) {
    report.stability_class = classify_stability(*report.spectral_radius, lf, lg, copt).stability;
  }

  if (lf.size() >= 2 && std::all_of(lf.begin(), lf.end(), [](double v) { return std::isfinite(v); })) {
    report.loss_stability = loss_stability_index(lf, params.loss_window);
  }
  if (log.full_state() && !log.empty()) {
    const ModeCollapseTrend trend = mode_collapse_trend(log, params.collapse_window, params.collapse_threshold);
    report.mode_collapse_trend = trend.slope;
    report.mode_collapse_high = trend.high;
    if (trend.temporal_variance) report.flags.emplace_back("mode_collapse_temporal_variance");
  }
  if (!log.empty()) report.global_stability = global_stability_index(log, params.stability_window);

  auto note_missing = [&](bool present, const char* name) {
    if (!present) report.missing.emplace_back(name);
  };
  note_missing(report.spectral_radius.has_value(), "spectral_radius");
  note_missing(report.stability_class.has_value(), "stability_class");
  note_missing(report.high_freq_power_ratio.has_value(), "high_freq_power_ratio");
  note_missing(report.loss_stability.has_value(), "loss_stability");
  note_missing(report.mode_collapse_trend.has_value(), "mode_collapse_trend");
  note_missing(report.global_stability.has_value(), "global_stability");
  return report;
}

}  // namespace lmlrsga
