#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "lmlrsga/lmlrsga.hpp"
#include "oracles.hpp"

using namespace lmlrsga;

namespace {

const double kPi = std::acos(-1.0);

Matrix rotation(double radius, double angle) {
  Matrix r(2, 2);
  r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return radius * r;
}

Matrix linear_trajectory(const Matrix& map, const Vector& w0, int steps) {
  Matrix out(w0.size(), steps + 1);
  out.col(0) = w0;
  for (int k = 0; k < steps; ++k) out.col(k + 1) = map * out.col(k);
  return out;
}

TrajectoryLog run_log(const Game& game, const std::function<Vector(const Vector&)>& step, Vector w, int steps) {
  TrajectoryLog log(game.dims());
  for (int k = 0; k <= steps; ++k) {
    log.record(static_cast<std::size_t>(k), w, *game.loss_f(w, nullptr), *game.loss_g(w, nullptr));
    if (k < steps) w = step(w);
  }
  return log;
}

std::vector<double> series(std::size_t n, const std::function<double(double)>& f) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = f(static_cast<double>(k));
  return out;
}

}  // namespace

// --- fit ---------------------------------------------------------------------

TEST(Fit, ScaledRotationRecovery) {
  const Matrix snaps = linear_trajectory(rotation(0.99, 0.1), (Vector(2) << 1.0, 0.5).finished(), 99);
  const auto fit = fit_reduced_operator(snaps, 2);
  EXPECT_EQ(fit.effective_rank, 2u);
  const auto eig = dense_eigenvalues(fit.op);
  ASSERT_EQ(eig.size(), 2u);
  for (const auto& z : eig) {
    EXPECT_NEAR(std::abs(z), 0.99, 1e-8);
    EXPECT_NEAR(std::abs(std::arg(z)), 0.1, 1e-8);
  }
  EXPECT_NEAR(eig[0].imag(), -eig[1].imag(), 1e-12);
}

TEST(Fit, IdentityDynamics) {
  const Matrix snaps = linear_trajectory(Matrix::Identity(3, 3), (Vector(3) << 1, -2, 0.5).finished(), 10);
  const auto fit = fit_reduced_operator(snaps, 3);
  EXPECT_EQ(fit.effective_rank, 1u);
  EXPECT_EQ(spectral_radius(dense_eigenvalues(fit.op)), 1.0);
}

TEST(Fit, ZeroDynamics) {
  const Matrix snaps = linear_trajectory(Matrix::Zero(2, 2), (Vector(2) << 3, 4).finished(), 5);
  const auto fit = fit_reduced_operator(snaps, 2);
  EXPECT_EQ(spectral_radius(dense_eigenvalues(fit.op)), 0.0);
}

TEST(Fit, EmbeddedDiagonalMaps) {
  std::mt19937_64 rng(9);
  for (int rank : {1, 3, 6, 10}) {
    Matrix basis = Matrix::NullaryExpr(50, rank, [&] { return std::normal_distribution<double>()(rng); });
    basis = Eigen::HouseholderQR<Matrix>(basis).householderQ() * Matrix::Identity(50, rank);
    Vector lambda(rank);
    for (int i = 0; i < rank; ++i) lambda[i] = 1.05 - 0.06 * i;
    const Matrix map = basis * lambda.asDiagonal() * basis.transpose();
    const Matrix snaps = linear_trajectory(map, basis * Vector::Ones(rank), 80);
    const auto fit = fit_reduced_operator(snaps, 40);
    EXPECT_EQ(fit.effective_rank, static_cast<std::size_t>(rank));
    const auto eig = dense_eigenvalues(fit.op);
    ASSERT_EQ(eig.size(), static_cast<std::size_t>(rank));
    for (int i = 0; i < rank; ++i) {
      EXPECT_NEAR(eig[static_cast<std::size_t>(i)].real(), lambda[i], 1e-8) << "rank " << rank;
      EXPECT_NEAR(eig[static_cast<std::size_t>(i)].imag(), 0.0, 1e-8);
    }
  }
}

TEST(Fit, NeedsEnoughSnapshots) {
  EXPECT_THROW(fit_reduced_operator(Matrix::Ones(4, 3), 3), UsageError);
  EXPECT_THROW(fit_reduced_operator(Matrix::Ones(4, 3), 0), UsageError);
}

// --- eigenvalues -------------------------------------------------------------

TEST(Eigen, Diagonal) {
  Matrix a(2, 2);
  a << 0.5, 0, 0, 2;
  const auto eig = dominant_eigenvalues(a).values;
  EXPECT_EQ(eig[0], Complex(2, 0));
  EXPECT_EQ(eig[1], Complex(0.5, 0));
  EXPECT_EQ(spectral_radius(eig), 2.0);
}

TEST(Eigen, RotationModuli) {
  const auto eig = dominant_eigenvalues(rotation(0.99, 0.1)).values;
  for (const auto& z : eig) EXPECT_NEAR(std::abs(z), 0.99, 1e-14);
}

TEST(Eigen, CompanionMatrix) {
  Matrix c(2, 2);
  c << 1, 1, 1, 0;  // companion of z^2 - z - 1
  const auto eig = dominant_eigenvalues(c).values;
  EXPECT_NEAR(eig[0].real(), (1 + std::sqrt(5.0)) / 2, 1e-14);
  EXPECT_NEAR(eig[1].real(), (1 - std::sqrt(5.0)) / 2, 1e-14);
}

TEST(Eigen, ArnoldiAgreesWithDenseOnLeadingModuli) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix a = Matrix::NullaryExpr(40, 40, [&] { return std::normal_distribution<double>()(rng); }) / 6.0;
    const auto dense = dense_eigenvalues(a);
    EigenOptions opt;
    opt.iterative = true;
    opt.seed = static_cast<std::uint64_t>(trial);
    const auto iter = dominant_eigenvalues(a, opt);
    ASSERT_GE(iter.values.size(), 5u);
    EXPECT_FALSE(iter.fell_back);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(std::abs(iter.values[i]), std::abs(dense[i]), 1e-6);
  }
}

TEST(Eigen, ArnoldiBreakdownFallsBack) {
  // A nilpotent shift from e_1 exhausts the Krylov space at once.
  Matrix a = Matrix::Zero(6, 6);
  EigenOptions opt;
  opt.iterative = true;
  const auto res = dominant_eigenvalues(a, opt);
  EXPECT_EQ(spectral_radius(res.values), 0.0);
  EXPECT_TRUE(res.fell_back || res.iterative);
}

// --- Welch -------------------------------------------------------------------

TEST(Welch, ConstantSignalIsPureDc) {
  const auto x = std::vector<double>(512, 3.0);
  const auto psd = welch_psd(x);
  double total = 0.0;
  for (double p : psd.power) total += p;
  for (std::size_t b = 1; b < psd.power.size(); ++b) EXPECT_LT(psd.power[b], 1e-20 * total);
  EXPECT_NEAR(psd.power[0] / static_cast<double>(psd.window_len), 9.0, 1e-12);
}

TEST(Welch, SinusoidPeakBin) {
  const auto x = series(256, [](double k) { return std::sin(2 * kPi * 0.25 * k); });
  const auto psd = welch_psd(x);
  const auto peak = std::max_element(psd.power.begin(), psd.power.end()) - psd.power.begin();
  EXPECT_EQ(psd.frequencies[static_cast<std::size_t>(peak)], 0.25);
}

TEST(Welch, TwoToneRatio) {
  const auto x = series(1024, [](double k) { return 2 * std::sin(2 * kPi * 0.1 * k) + std::sin(2 * kPi * 0.4 * k); });
  const auto psd = welch_psd(x);
  auto peak_near = [&](double f) {
    double best = 0;
    for (std::size_t b = 0; b < psd.power.size(); ++b) {
      if (std::abs(psd.frequencies[b] - f) < 0.01) best = std::max(best, psd.power[b]);
    }
    return best;
  };
  EXPECT_NEAR(peak_near(0.1) / peak_near(0.4), 4.0, 0.8);
}

TEST(Welch, MatchesNaiveDftOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (std::size_t len : {64u, 200u, 300u}) {
    std::vector<double> x(len);
    for (auto& v : x) v = 0.7 + normal(rng);
    for (bool keep_dc : {true, false}) {
      WelchOptions opt;
      opt.window_len = 64;
      opt.detrend = keep_dc ? Detrend::none : Detrend::constant;
      const auto psd = welch_psd(x, opt);
      const auto ref = oracle::naive_welch(x, 64, keep_dc);
      ASSERT_EQ(psd.power.size(), ref.size());
      for (std::size_t b = 0; b < ref.size(); ++b) EXPECT_NEAR(psd.power[b], ref[b], 1e-10 * (1 + ref[b]));
    }
  }
}

TEST(Welch, Parseval) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> signals;
  signals.push_back(series(2048, [](double k) { return std::sin(2 * kPi * 0.05 * k); }));
  signals.push_back(series(2048, [](double k) { return 2 * std::sin(2 * kPi * 0.1 * k) + std::cos(2 * kPi * 0.37 * k); }));
  std::vector<double> noise(4096);
  for (auto& v : noise) v = normal(rng);
  signals.push_back(noise);
  std::vector<double> ar(4096);
  double prev = 0;
  for (auto& v : ar) v = prev = 0.8 * prev + normal(rng);
  signals.push_back(ar);
  signals.push_back(series(2048, [](double k) { return std::pow(-1.0, k) * 0.5 + 0.2 * std::sin(0.3 * k); }));
  for (const auto& x : signals) {
    double mean = 0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(x.size());
    WelchOptions opt;
    opt.detrend = Detrend::constant;
    const auto psd = welch_psd(x, opt);
    double integral = 0;
    for (double p : psd.power) integral += p / static_cast<double>(psd.window_len);
    EXPECT_NEAR(integral / var, 1.0, 0.1);
  }
}

TEST(Welch, ShortSeriesShrinksWindow) {
  const auto psd = welch_psd(series(40, [](double k) { return k; }));
  EXPECT_TRUE(psd.window_shrunk);
  EXPECT_EQ(psd.window_len, 40u);
  EXPECT_THROW(welch_psd(series(5, [](double k) { return k; })), UsageError);
}

// --- classification ------------------------------------------------------------

namespace {
const std::vector<double> kSmooth = series(300, [](double k) { return std::pow(1.02, k / 10.0); });
const std::vector<double> kJagged = series(300, [](double k) { return 1.0 + 0.5 * std::pow(-1.0, k); });
}  // namespace

TEST(Classify, Fixtures) {
  ClassifyOptions opt;
  opt.eps = 0.05;
  EXPECT_EQ(classify_stability(0.90, kSmooth, kSmooth, opt).stability, StabilityClass::stable);
  EXPECT_EQ(classify_stability(1.02, kSmooth, kSmooth, opt).stability, StabilityClass::marginal);
  EXPECT_EQ(classify_stability(1.02, kJagged, kSmooth, opt).stability, StabilityClass::unstable);
  EXPECT_EQ(classify_stability(2.81, kSmooth, kSmooth, opt).stability, StabilityClass::unstable);
  EXPECT_EQ(classify_stability(1.48, kSmooth, kSmooth, opt).stability, StabilityClass::unstable);
}

TEST(Classify, ContractingBand) {
  ClassifyOptions opt;
  EXPECT_EQ(classify_stability(0.96, kSmooth, kSmooth, opt).stability, StabilityClass::stable);
  EXPECT_EQ(classify_stability(0.96, kJagged, kJagged, opt).stability, StabilityClass::unstable);
  opt.contracting_band_is_stable = false;
  EXPECT_EQ(classify_stability(0.96, kSmooth, kSmooth, opt).stability, StabilityClass::marginal);
}

TEST(Classify, NoUsableLossesInsideBandIsUnstable) {
  const std::vector<double> none;
  const auto c = classify_stability(1.0, none, none);
  EXPECT_FALSE(c.hf_ratio);
  EXPECT_EQ(c.stability, StabilityClass::unstable);
}

TEST(Classify, HfRatioRange) {
  const double smooth = high_frequency_power_ratio(kSmooth, 0.1);
  const double jagged = high_frequency_power_ratio(kJagged, 0.1);
  EXPECT_LT(smooth, 0.2);
  EXPECT_GT(jagged, 0.9);
  EXPECT_LE(jagged, 1.0);
  EXPECT_EQ(high_frequency_power_ratio(std::vector<double>(64, 2.0), 0.1), 0.0);
}

TEST(Classify, PureFunction) {
  const auto a = classify_stability(1.01, kSmooth, kJagged);
  const auto b = classify_stability(1.01, kSmooth, kJagged);
  EXPECT_EQ(a.stability, b.stability);
  EXPECT_EQ(a.hf_ratio, b.hf_ratio);
}

// --- indices -------------------------------------------------------------------

TEST(LossStability, Examples) {
  EXPECT_EQ(loss_stability_index(std::vector<double>(50, 4.0), 10), 1.0);
  const auto alt = series(100, [](double k) { return std::pow(-1.0, k); });
  EXPECT_NEAR(loss_stability_index(alt, 20), 0.5, 1e-12);
  const auto decay = series(400, [](double k) { return std::pow(0.97, k); });
  const std::span<const double> all(decay);
  const double early = loss_stability_index(all.subspan(0, 100), 20);
  const double late = loss_stability_index(all.subspan(300, 100), 20);
  EXPECT_LT(early, late);
  EXPECT_GT(late, 0.999);
  EXPECT_THROW(loss_stability_index(alt, 1), UsageError);
}

namespace {
TrajectoryLog log_from(const std::vector<Vector>& ws, GameDims dims) {
  TrajectoryLog log(dims);
  for (std::size_t k = 0; k < ws.size(); ++k) log.record(k, ws[k], 0.0, 0.0);
  return log;
}
}  // namespace

TEST(GlobalStability, Examples) {
  const GameDims dims(1, 1);
  std::vector<Vector> frozen(30, Vector::Constant(2, 0.3));
  EXPECT_EQ(global_stability_index(log_from(frozen, dims), 10), 1.0);

  const Vector u = (Vector(2) << 0.6, 0.8).finished();
  std::vector<Vector> jump;
  for (int k = 0; k < 60; ++k) jump.push_back((k % 2 == 0 ? 1.0 : -1.0) * u + Vector::Constant(2, 5.0));
  EXPECT_NEAR(global_stability_index(log_from(jump, dims), 20), 0.5, 1e-12);

  std::vector<Vector> wider;
  for (const auto& w : jump) wider.push_back(5.0 + 2.0 * (w.array() - 5.0));
  EXPECT_LT(global_stability_index(log_from(wider, dims), 20), global_stability_index(log_from(jump, dims), 20));
}

TEST(ModeCollapse, StaticIsLow) {
  std::vector<Vector> ws(50, (Vector(4) << 1, 2, 3, 0).finished());
  const auto t = mode_collapse_trend(log_from(ws, GameDims(3, 1)), 10);
  EXPECT_EQ(t.slope, 0.0);
  EXPECT_FALSE(t.high);
}

TEST(ModeCollapse, ContractingCoordinatesHaveNegativeSlope) {
  std::vector<Vector> ws;
  for (int k = 0; k < 100; ++k) {
    const double s = std::pow(0.95, k);
    ws.push_back((Vector(4) << 1 + s, 1 - s, 1 + 0.5 * s, 0).finished());
  }
  const auto t = mode_collapse_trend(log_from(ws, GameDims(3, 1)), 10);
  EXPECT_LT(t.slope, 0.0);
  EXPECT_TRUE(t.high);
}

TEST(ModeCollapse, RotationHasNearZeroSlope) {
  std::vector<Vector> ws;
  for (int k = 0; k < 2000; ++k) ws.push_back((Vector(3) << std::cos(0.1 * k), std::sin(0.1 * k), 0).finished());
  const auto t = mode_collapse_trend(log_from(ws, GameDims(2, 1)), 20);
  EXPECT_LT(std::abs(t.slope), 1e-5);
  EXPECT_FALSE(t.high);
}

TEST(ModeCollapse, SingleGeneratorParameterUsesTemporalVariance) {
  std::vector<Vector> ws;
  for (int k = 0; k < 60; ++k) ws.push_back((Vector(2) << std::pow(0.9, k) * std::pow(-1.0, k), 0).finished());
  const auto t = mode_collapse_trend(log_from(ws, GameDims(1, 1)), 10);
  EXPECT_TRUE(t.temporal_variance);
  EXPECT_LT(t.slope, 0.0);
}

// --- analyze -------------------------------------------------------------------

TEST(Analyze, BilinearSga) {
  const auto game = BilinearGame::identity(1);
  const auto log = run_log(game, [&](const Vector& w) { return sga_step_exact(game, w, 0.1, 0.5); },
                           (Vector(2) << 1, 0).finished(), 300);
  const auto report = analyze(log);
  ASSERT_TRUE(report.spectral_radius);
  EXPECT_NEAR(*report.spectral_radius, std::sqrt(0.9125), 1e-6);
  EXPECT_EQ(report.stability_class, StabilityClass::stable);
  EXPECT_EQ(report.rank, 2u);
  EXPECT_TRUE(report.missing.empty());
}

TEST(Analyze, BilinearSimGd) {
  const auto game = BilinearGame::identity(1);
  const auto log = run_log(game, [&](const Vector& w) { return simgd_step(game, w, 0.1); },
                           (Vector(2) << 1, 0).finished(), 300);
  const auto report = analyze(log);
  EXPECT_NEAR(*report.spectral_radius, std::sqrt(1.01), 1e-6);
  EXPECT_EQ(report.stability_class, StabilityClass::marginal);
  EXPECT_LE(*report.high_freq_power_ratio, 0.2);
}

TEST(Analyze, ScalarGrowth) {
  TrajectoryLog log(GameDims(1, 1));
  Vector w = (Vector(2) << 1, -0.5).finished();
  for (std::size_t k = 0; k < 40; ++k, w *= 1.2) log.record(k, w, NAN, NAN);
  const auto report = analyze(log);
  EXPECT_NEAR(*report.spectral_radius, 1.2, 1e-12);
  EXPECT_EQ(report.stability_class, StabilityClass::unstable);
  EXPECT_EQ(report.spectral_radius, spectral_radius(report.eigenvalues));
  EXPECT_NE(std::find(report.missing.begin(), report.missing.end(), "loss_stability"), report.missing.end());
}

TEST(Analyze, RhoEqualsMaxModulusExactly) {
  std::mt19937_64 rng(13);
  const auto game = QuadraticGame::random(3, 3, rng);
  const auto log = run_log(game, [&](const Vector& w) { return simgd_step(game, w, 0.3); },
                           oracle::random_vector(rng, 6), 100);
  const auto report = analyze(log);
  double rho = 0;
  for (const auto& z : report.eigenvalues) rho = std::max(rho, std::abs(z));
  EXPECT_EQ(*report.spectral_radius, rho);
  EXPECT_GE(*report.loss_stability, 0.0);
  EXPECT_LE(*report.loss_stability, 1.0);
  EXPECT_GE(*report.global_stability, 0.0);
  EXPECT_LE(*report.global_stability, 1.0);
}

TEST(Analyze, NormOnlyLogReportsMissingSpectrum) {
  TrajectoryLog log(GameDims(2, 2), false);
  for (std::size_t k = 0; k < 20; ++k) log.record(k, Vector::Constant(4, 1.0 / (1.0 + k)), 1.0, 1.0);
  const auto report = analyze(log);
  EXPECT_FALSE(report.spectral_radius);
  EXPECT_NE(std::find(report.flags.begin(), report.flags.end(), "norm_only_log"), report.flags.end());
  EXPECT_NE(std::find(report.missing.begin(), report.missing.end(), "spectral_radius"), report.missing.end());
}

// --- trajectory I/O ------------------------------------------------------------

TEST(Trajectory, RejectsNonIncreasingAndNonFinite) {
  TrajectoryLog log(GameDims(1, 1));
  log.record(0, Vector::Zero(2), 0, 0);
  EXPECT_THROW(log.record(0, Vector::Zero(2), 0, 0), UsageError);
  EXPECT_THROW(log.record(1, Vector::Constant(2, NAN), 0, 0), NumericalError);
}

TEST(Trajectory, StrideThinsSnapshots) {
  TrajectoryLog log(GameDims(1, 1), true, 5);
  for (std::size_t k = 0; k < 23; ++k) log.record(k, Vector::Zero(2), 0, 0);
  EXPECT_EQ(log.size(), 5u);
  EXPECT_EQ(log.snapshots().back().k, 20u);
}

TEST(Trajectory, CsvRoundTripIsExact) {
  std::mt19937_64 rng(14);
  TrajectoryLog log(GameDims(2, 3));
  for (std::size_t k = 0; k < 10; ++k) {
    log.record(k, oracle::random_vector(rng, 5), std::normal_distribution<double>()(rng), k == 3 ? NAN : 1.0 / 3.0);
  }
  std::stringstream buf;
  write_trajectory_csv(log, buf);
  const std::string text = buf.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "k,loss_f,loss_g,w_0,w_1,w_2,w_3,w_4");
  const auto back = read_trajectory_csv(buf, GameDims(2, 3));
  ASSERT_EQ(back.size(), log.size());
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(back.snapshots()[i].k, log.snapshots()[i].k);
    EXPECT_TRUE(back.snapshots()[i].w == log.snapshots()[i].w);
    EXPECT_EQ(back.snapshots()[i].loss_f, log.snapshots()[i].loss_f);
  }
  EXPECT_TRUE(std::isnan(back.snapshots()[3].loss_g));
}

TEST(Trajectory, CsvRejectsWrongDims) {
  TrajectoryLog log(GameDims(1, 1));
  log.record(0, Vector::Zero(2), 0, 0);
  std::stringstream buf;
  write_trajectory_csv(log, buf);
  EXPECT_THROW(read_trajectory_csv(buf, GameDims(2, 1)), UsageError);
}

TEST(ReportJson, RoundTrip) {
  const auto game = BilinearGame::identity(1);
  const auto log = run_log(game, [&](const Vector& w) { return sga_step_exact(game, w, 0.1, 0.5); },
                           (Vector(2) << 1, 0).finished(), 100);
  const auto report = analyze(log);
  const auto json = report_to_json(report);
  for (const char* key : {"spectral_radius", "stability_class", "eigenvalues", "high_freq_power_ratio",
                          "loss_stability", "mode_collapse_trend", "global_stability", "rank", "eps"}) {
    EXPECT_TRUE(json.contains(key)) << key;
  }
  const auto back = report_from_json(nlohmann::json::parse(json.dump()));
  EXPECT_EQ(back.spectral_radius, report.spectral_radius);
  EXPECT_EQ(back.stability_class, report.stability_class);
  EXPECT_EQ(back.eigenvalues, report.eigenvalues);
  EXPECT_EQ(back.global_stability, report.global_stability);
}
