#pragma once

// Config-driven batch runner. A config is a JSON document:
//
// {
//   "games": [{"name": "bilinear", "label": "bl", "params": {...}}],   (or "game": {...})
//   "optimizers": [{"name": "lmlrsga", "label": "lm", "eta": 0.1, "tau": 0.5, ...}],
//   "steps": 500, "seed": 1,
//   "logging": {"stride": 1, "full_state": true},
//   "spectral": {"rank": 40, "eps": 0.05, ...},
//   "plots": true
// }
//
// Unknown keys anywhere are rejected.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lmlrsga/benchmark_games.hpp"
#include "lmlrsga/optimizers.hpp"
#include "lmlrsga/plots.hpp"
#include "lmlrsga/report_json.hpp"
#include "lmlrsga/spectral.hpp"
#include "lmlrsga/trajectory.hpp"

namespace lmlrsga {

using Json = nlohmann::json;

struct GameSpec {
  std::string name;
  std::string label;
  Json params = Json::object();
};

struct OptimizerSpec {
  std::string label;
  OptimizerKind kind = OptimizerKind::simgd;
  OptimizerConfig config;
};

struct LoggingConfig {
  std::size_t stride = 1;
  bool full_state = true;
};

struct ExperimentConfig {
  std::vector<GameSpec> games;
  std::vector<OptimizerSpec> optimizers;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  LoggingConfig logging;
  SpectralParams spectral;
  bool plots = true;
  double divergence_threshold = 1e12;
};

// A constructed game plus its starting point.
struct GameInstance {
  std::unique_ptr<Game> game;
  Vector initial;
};

namespace detail {

// Object view that remembers which keys were consumed so leftovers can be
// reported as unknown.
class StrictObject {
 public:
  StrictObject(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  T get(const char* key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(j_.at(key), key);
  }

  template <class T>
  T require(const char* key) {
    if (!has(key)) throw ConfigError(where_ + ": missing required key '" + key + "'");
    return convert<T>(j_.at(key), key);
  }

  const Json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  template <class T>
  T convert(const Json& v, const char* key) const {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(where_ + "." + key + ": expected a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(where_ + "." + key + ": expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0)) {
          throw ConfigError(where_ + "." + key + ": expected a nonnegative integer");
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(where_ + "." + key + ": expected a string");
      }
      return v.get<T>();
    } catch (const Json::exception& e) {
      throw ConfigError(where_ + "." + key + ": " + e.what());
    }
  }

  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

inline Matrix matrix_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty() || !j.front().is_array() || j.front().empty()) {
    throw ConfigError(where + ": expected a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError(where + ": ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Json& v = row.at(static_cast<std::size_t>(c));
      if (!v.is_number()) throw ConfigError(where + ": matrix entries must be numbers");
      out(i, c) = v.get<double>();
    }
  }
  return out;
}

inline Vector vector_from_json(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ConfigError(where + ": expected a non-empty array");
  Vector out(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(where + ": entries must be numbers");
    out[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return out;
}

inline Vector initial_or(StrictObject& params, Vector fallback) {
  if (!params.has("init")) return fallback;
  Vector init = vector_from_json(params.raw("init"), params.where() + ".init");
  if (init.size() != fallback.size()) {
    throw ConfigError(params.where() + ".init: expected " + std::to_string(fallback.size()) + " entries");
  }
  return init;
}

inline Vector stacked(const Vector& x, const Vector& y) {
  Vector w(x.size() + y.size());
  w << x, y;
  return w;
}

}  // namespace detail

// Builds the named game. Quadratic games without explicit blocks are drawn
// from `seed` (or params.seed).
inline GameInstance build_game(const GameSpec& spec, std::uint64_t seed) {
  detail::StrictObject params(spec.params, "game '" + spec.label + "'.params");
  GameInstance out;
  try {
    if (spec.name == "bilinear") {
      Matrix coupling;
      if (params.has("coupling")) {
        coupling = detail::matrix_from_json(params.raw("coupling"), params.where() + ".coupling");
      } else {
        const auto n = params.get<std::size_t>("n", 1);
        if (n < 1) throw ConfigError(params.where() + ".n must be >= 1");
        const double scale = params.get<double>("scale", 1.0);
        coupling = scale * Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      }
      const auto m = coupling.rows();
      const auto n = coupling.cols();
      out.initial = detail::initial_or(params, detail::stacked(Vector::Ones(m), Vector::Zero(n)));
      out.game = std::make_unique<BilinearGame>(std::move(coupling));
    } else if (spec.name == "quadratic") {
      const bool explicit_blocks = params.has("P") || params.has("Q") || params.has("B");
      std::unique_ptr<QuadraticGame> game;
      if (explicit_blocks) {
        if (!params.has("P") || !params.has("Q") || !params.has("B")) {
          throw ConfigError(params.where() + ": P, Q and B must be given together");
        }
        game = std::make_unique<QuadraticGame>(detail::matrix_from_json(params.raw("P"), params.where() + ".P"),
                                               detail::matrix_from_json(params.raw("Q"), params.where() + ".Q"),
                                               detail::matrix_from_json(params.raw("B"), params.where() + ".B"));
      } else {
        const auto m = params.get<std::size_t>("m", 2);
        const auto n = params.get<std::size_t>("n", 2);
        if (m < 1 || n < 1) throw ConfigError(params.where() + ": m and n must be >= 1");
        const double curvature = params.get<double>("curvature", 0.1);
        std::mt19937_64 rng(params.get<std::uint64_t>("seed", seed));
        game = std::make_unique<QuadraticGame>(QuadraticGame::random(m, n, rng, curvature));
      }
      const GameDims d = game->dims();
      out.initial = detail::initial_or(params, Vector::Ones(static_cast<Eigen::Index>(d.total())));
      out.game = std::move(game);
    } else if (spec.name == "toygan") {
      ToyGanConfig cfg;
      cfg.generator_params = params.get<std::size_t>("generator_params", cfg.generator_params);
      cfg.discriminator_params = params.get<std::size_t>("discriminator_params", cfg.discriminator_params);
      cfg.real_mean = params.get<double>("real_mean", cfg.real_mean);
      cfg.real_std = params.get<double>("real_std", cfg.real_std);
      cfg.penalty = params.get<double>("penalty", cfg.penalty);
      const auto norm = params.get<std::string>("penalty_norm", "l2");
      if (norm == "l2") {
        cfg.penalty_norm = PenaltyNorm::l2;
      } else if (norm == "l1") {
        cfg.penalty_norm = PenaltyNorm::l1;
      } else {
        throw ConfigError(params.where() + ".penalty_norm must be \"l1\" or \"l2\"");
      }
      cfg.pool_size = params.get<std::size_t>("pool_size", cfg.pool_size);
      cfg.batch_size = params.get<std::size_t>("batch_size", cfg.batch_size);
      cfg.data_seed = params.get<std::uint64_t>("data_seed", cfg.data_seed);
      auto game = std::make_unique<ToyGanGame>(cfg);
      const auto m = static_cast<Eigen::Index>(cfg.generator_params);
      const auto n = static_cast<Eigen::Index>(cfg.discriminator_params);
      out.initial = detail::initial_or(params, detail::stacked(Vector::Ones(m), Vector::Zero(n)));
      out.game = std::move(game);
    } else {
      throw ConfigError("unknown game '" + spec.name + "'");
    }
  } catch (const UsageError& e) {
    throw ConfigError("game '" + spec.label + "': " + e.what());
  }
  params.finish();
  if (!out.initial.allFinite()) throw ConfigError("game '" + spec.label + "': non-finite initial point");
  return out;
}

namespace detail {

inline BatchMode parse_batch_mode(const std::string& s, const std::string& where) {
  for (auto mode : {BatchMode::deterministic, BatchMode::displacement, BatchMode::overlap}) {
    if (to_string(mode) == s) return mode;
  }
  throw ConfigError(where + ".batch_mode: unknown mode '" + s + "'");
}

inline OptimizerSpec parse_optimizer(const Json& j, std::size_t index) {
  StrictObject obj(j, "optimizers[" + std::to_string(index) + "]");
  const auto name = obj.require<std::string>("name");
  const auto kind = parse_optimizer_kind(name);
  if (!kind) throw ConfigError(obj.where() + ": unknown optimizer '" + name + "'");
  OptimizerSpec spec;
  spec.kind = *kind;
  spec.label = obj.get<std::string>("label", name);
  OptimizerConfig& c = spec.config;
  c.eta = obj.get<double>("eta", c.eta);
  c.tau = obj.get<double>("tau", c.tau);
  c.eps_x = obj.get<double>("eps_x", c.eps_x);
  c.eps_y = obj.get<double>("eps_y", c.eps_y);
  c.history = obj.get<std::size_t>("history", c.history);
  c.beta = obj.get<double>("beta", c.beta);
  c.batch_mode = parse_batch_mode(obj.get<std::string>("batch_mode", "deterministic"), obj.where());
  c.sga_fd_fallback = obj.get<bool>("sga_fd_fallback", c.sga_fd_fallback);
  if (obj.has("adam")) {
    StrictObject adam(obj.raw("adam"), obj.where() + ".adam");
    c.adam.beta1 = adam.get<double>("beta1", c.adam.beta1);
    c.adam.beta2 = adam.get<double>("beta2", c.adam.beta2);
    c.adam.eps = adam.get<double>("eps", c.adam.eps);
    adam.finish();
  }
  obj.finish();
  try {
    c.validate();
  } catch (const UsageError& e) {
    throw ConfigError(obj.where() + ": " + e.what());
  }
  return spec;
}

inline GameSpec parse_game(const Json& j, const std::string& where) {
  StrictObject obj(j, where);
  GameSpec spec;
  spec.name = obj.require<std::string>("name");
  spec.label = obj.get<std::string>("label", spec.name);
  if (obj.has("params")) spec.params = obj.raw("params");
  obj.finish();
  return spec;
}

inline bool valid_label(const std::string& s) {
  if (s.empty() || s == "." || s == "..") return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; });
}

}  // namespace detail

// Parses and fully validates a config, including constructing every game once
// so that bad game parameters surface before any output is written.
inline ExperimentConfig parse_config(const Json& j) {
  detail::StrictObject root(j, "config");
  ExperimentConfig cfg;
  const bool single = root.has("game");
  const bool many = root.has("games");
  if (single == many) throw ConfigError("config: give exactly one of 'game' or 'games'");
  if (single) {
    cfg.games.push_back(detail::parse_game(root.raw("game"), "game"));
  } else {
    const Json& games = root.raw("games");
    if (!games.is_array() || games.empty()) throw ConfigError("config.games: expected a non-empty array");
    for (std::size_t i = 0; i < games.size(); ++i) {
      cfg.games.push_back(detail::parse_game(games[i], "games[" + std::to_string(i) + "]"));
    }
  }
  if (!root.has("optimizers")) throw ConfigError("config: missing required key 'optimizers'");
  const Json& opts = root.raw("optimizers");
  if (!opts.is_array() || opts.empty()) throw ConfigError("config.optimizers: expected a non-empty array");
  for (std::size_t i = 0; i < opts.size(); ++i) cfg.optimizers.push_back(detail::parse_optimizer(opts[i], i));

  cfg.steps = root.require<std::size_t>("steps");
  if (cfg.steps < 1) throw ConfigError("config.steps must be >= 1");
  cfg.seed = root.get<std::uint64_t>("seed", 0);
  cfg.plots = root.get<bool>("plots", true);
  cfg.divergence_threshold = root.get<double>("divergence_threshold", cfg.divergence_threshold);
  if (!(cfg.divergence_threshold > 0.0)) throw ConfigError("config.divergence_threshold must be > 0");
  if (root.has("logging")) {
    detail::StrictObject log(root.raw("logging"), "config.logging");
    cfg.logging.stride = log.get<std::size_t>("stride", 1);
    cfg.logging.full_state = log.get<bool>("full_state", true);
    log.finish();
    if (cfg.logging.stride < 1) throw ConfigError("config.logging.stride must be >= 1");
  }
  if (root.has("spectral")) {
    detail::StrictObject sp(root.raw("spectral"), "config.spectral");
    SpectralParams& p = cfg.spectral;
    p.rank = sp.get<std::size_t>("rank", p.rank);
    p.eps = sp.get<double>("eps", p.eps);
    p.hf_cutoff = sp.get<double>("hf_cutoff", p.hf_cutoff);
    p.hf_ratio_threshold = sp.get<double>("hf_ratio_threshold", p.hf_ratio_threshold);
    p.welch_window = sp.get<std::size_t>("welch_window", p.welch_window);
    p.loss_window = sp.get<std::size_t>("loss_window", p.loss_window);
    p.stability_window = sp.get<std::size_t>("stability_window", p.stability_window);
    p.collapse_window = sp.get<std::size_t>("collapse_window", p.collapse_window);
    p.collapse_threshold = sp.get<double>("collapse_threshold", p.collapse_threshold);
    p.center = sp.get<bool>("center", p.center);
    p.iterative = sp.get<bool>("iterative", p.iterative);
    p.contracting_band_is_stable = sp.get<bool>("contracting_band_is_stable", p.contracting_band_is_stable);
    sp.finish();
    try {
      p.validate();
    } catch (const UsageError& e) {
      throw ConfigError(std::string("config.spectral: ") + e.what());
    }
  }
  root.finish();

  std::set<std::string> labels;
  for (const auto& g : cfg.games) {
    if (!detail::valid_label(g.label)) throw ConfigError("game label '" + g.label + "' is not a valid directory name");
    if (!labels.insert(g.label).second) throw ConfigError("duplicate game label '" + g.label + "'");
  }
  labels.clear();
  for (const auto& o : cfg.optimizers) {
    if (!detail::valid_label(o.label)) throw ConfigError("optimizer label '" + o.label + "' is not a valid directory name");
    if (!labels.insert(o.label).second) throw ConfigError("duplicate optimizer label '" + o.label + "'");
  }
  for (const auto& g : cfg.games) {
    const GameInstance inst = build_game(g, cfg.seed);
    for (const auto& o : cfg.optimizers) {
      if (o.kind == OptimizerKind::sga && !o.config.sga_fd_fallback && !inst.game->mixed_blocks(inst.initial)) {
        throw ConfigError("optimizer '" + o.label + "': exact SGA needs closed-form mixed blocks on game '" + g.label +
                          "' (set sga_fd_fallback)");
      }
      if (o.config.batch_mode == BatchMode::overlap && inst.game->stochastic()) {
        const Batch a = inst.game->sample_batch({cfg.seed, 0});
        const Batch b = inst.game->sample_batch({cfg.seed, 1});
        if (intersect(a, b).empty()) {
          throw ConfigError("optimizer '" + o.label + "': overlap mode needs overlapping batches on game '" + g.label + "'");
        }
      }
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

enum class RunStatus { ok, diverged, failed };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::ok: return "ok";
    case RunStatus::diverged: return "diverged";
    case RunStatus::failed: return "failed";
  }
  return "?";
}

struct RunResult {
  std::string game;
  std::string optimizer;
  RunStatus status = RunStatus::ok;
  std::string message;
  TrajectoryLog log{GameDims(1, 1)};
  SpectralReport report;
  std::size_t steps_run = 0;
  double final_grad_norm = 0.0;
  double final_loss_f = 0.0;
  double final_loss_g = 0.0;
  double wall_time = 0.0;
  std::vector<std::string> plot_files;
  std::vector<std::string> warnings;
};

namespace detail {
inline double loss_or_nan(const std::optional<double>& v) { return v ? *v : std::numeric_limits<double>::quiet_NaN(); }
}  // namespace detail

// One optimizer on one game. Losses are logged on the full data; steps use
// batch B_k = sample_batch({seed, k}) on stochastic games.
inline RunResult run_single(const Game& game, const Vector& initial, const OptimizerSpec& spec,
                            const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  RunResult result;
  result.optimizer = spec.label;
  result.log = TrajectoryLog(game.dims(), cfg.logging.full_state, cfg.logging.stride);
  auto opt = make_optimizer(spec.kind, spec.config, game.dims());

  Vector w = initial;
  result.log.record(0, w, detail::loss_or_nan(game.loss_f(w, nullptr)), detail::loss_or_nan(game.loss_g(w, nullptr)));
  std::optional<Batch> current;
  std::optional<Batch> next;
  if (game.stochastic()) current = game.sample_batch({cfg.seed, 0});
  try {
    for (std::size_t k = 0; k < cfg.steps; ++k) {
      if (game.stochastic()) next = game.sample_batch({cfg.seed, k + 1});
      const StepBatches batches{current ? &*current : nullptr, next ? &*next : nullptr};
      Vector w_next = opt->step(game, w, batches);
      if (!w_next.allFinite() || w_next.norm() > cfg.divergence_threshold) {
        result.status = RunStatus::diverged;
        result.message = "iterate norm exceeded " + format_double(cfg.divergence_threshold) + " at step " + std::to_string(k + 1);
        break;
      }
      w = std::move(w_next);
      result.steps_run = k + 1;
      result.log.record(k + 1, w, detail::loss_or_nan(game.loss_f(w, nullptr)),
                        detail::loss_or_nan(game.loss_g(w, nullptr)));
      current = std::move(next);
    }
  } catch (const NumericalError& e) {
    result.status = RunStatus::diverged;
    result.message = e.what();
  }
  // The last accepted iterate closes the log even when it is off-stride.
  if (result.log.empty() || result.log.snapshots().back().k != result.steps_run) {
    result.log.append(result.steps_run, w, detail::loss_or_nan(game.loss_f(w, nullptr)),
                      detail::loss_or_nan(game.loss_g(w, nullptr)));
  }
  try {
    result.final_grad_norm = evaluate_field(game, w, nullptr).norm();
  } catch (const NumericalError&) {
    result.final_grad_norm = std::numeric_limits<double>::quiet_NaN();
  }
  result.final_loss_f = detail::loss_or_nan(game.loss_f(w, nullptr));
  result.final_loss_g = detail::loss_or_nan(game.loss_g(w, nullptr));
  try {
    result.report = analyze(result.log, cfg.spectral);
  } catch (const Error& e) {
    result.status = RunStatus::failed;
    result.message = std::string("analysis failed: ") + e.what();
  }
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

struct RunSummary {
  std::vector<RunResult> runs;
  std::filesystem::path output_dir;

  bool any_failed() const {
    return std::any_of(runs.begin(), runs.end(), [](const RunResult& r) { return r.status == RunStatus::failed; });
  }
};

inline Json run_report_json(const RunResult& r, const std::string& game_name) {
  Json j = report_to_json(r.report);
  j["run"] = {{"game", r.game},
              {"game_name", game_name},
              {"optimizer", r.optimizer},
              {"m", r.log.dims().m},
              {"n", r.log.dims().n},
              {"status", to_string(r.status)},
              {"message", r.message},
              {"steps_run", r.steps_run}};
  return j;
}

inline const char* kSummaryHeader =
    "game,optimizer,status,steps_run,rho,stability_class,final_grad_norm,final_loss_f,final_loss_g,wall_time_s,plots";

inline void write_summary_csv(const RunSummary& summary, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << kSummaryHeader << '\n';
  for (const auto& r : summary.runs) {
    std::string plots;
    for (const auto& f : r.plot_files) plots += (plots.empty() ? "" : ";") + (r.game + "/" + r.optimizer + "/" + f);
    out << r.game << ',' << r.optimizer << ',' << to_string(r.status) << ',' << r.steps_run << ','
        << (r.report.spectral_radius ? format_double(*r.report.spectral_radius) : "") << ','
        << (r.report.stability_class ? to_string(*r.report.stability_class) : "") << ','
        << format_double(r.final_grad_norm) << ',' << format_double(r.final_loss_f) << ','
        << format_double(r.final_loss_g) << ',' << format_double(r.wall_time) << ',' << plots << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

// Runs every (game, optimizer) pair, writing <out>/<game>/<optimizer>/
// {trajectory.csv, report.json, *.svg} and <out>/summary.csv. Independent runs
// may execute on up to `parallel` threads; output order follows the config.
inline RunSummary run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                                 unsigned parallel = 1) {
  std::vector<GameInstance> games;
  for (const auto& g : cfg.games) games.push_back(build_game(g, cfg.seed));

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  const std::size_t jobs = games.size() * cfg.optimizers.size();
  RunSummary summary;
  summary.output_dir = out_dir;
  summary.runs.resize(jobs);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&]() {
    for (std::size_t job = cursor++; job < jobs; job = cursor++) {
      const std::size_t gi = job / cfg.optimizers.size();
      const std::size_t oi = job % cfg.optimizers.size();
      RunResult r = run_single(*games[gi].game, games[gi].initial, cfg.optimizers[oi], cfg);
      r.game = cfg.games[gi].label;
      summary.runs[job] = std::move(r);
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(jobs)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t job = 0; job < jobs; ++job) {
    RunResult& r = summary.runs[job];
    const auto dir = out_dir / r.game / r.optimizer;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
    write_trajectory_csv(r.log, (dir / "trajectory.csv").string());
    detail::write_text(dir / "report.json", run_report_json(r, cfg.games[job / cfg.optimizers.size()].name).dump(2) + "\n");
    if (cfg.plots) {
      PlotResult plots = emit_plots(r.log, r.report, dir, r.game + " / " + r.optimizer, cfg.spectral.stability_window);
      r.plot_files = std::move(plots.files);
      r.warnings.insert(r.warnings.end(), plots.warnings.begin(), plots.warnings.end());
    }
  }
  write_summary_csv(summary, out_dir / "summary.csv");
  return summary;
}

}  // namespace lmlrsga
