// Command-line front end: run experiments, analyze external trajectories,
// re-render plots.
//
//   lmlrsga run --config <path> --out <dir> [--seed N] [--parallel K]
//   lmlrsga analyze --trajectory <csv> --dims m,n [--rank r] [--eps 0.05]
//   lmlrsga plot --run <dir>
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lmlrsga/lmlrsga.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

lmlrsga::GameDims parse_dims(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw lmlrsga::ConfigError("--dims expects m,n");
  try {
    std::size_t used = 0;
    const unsigned long m = std::stoul(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("m");
    const std::string rest = text.substr(comma + 1);
    const unsigned long n = std::stoul(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("n");
    return lmlrsga::GameDims(m, n);
  } catch (const std::logic_error&) {
    throw lmlrsga::ConfigError("--dims expects two positive integers m,n");
  }
}

int run_command(const std::string& config_path, const std::string& out_dir, const std::optional<std::uint64_t>& seed,
                unsigned parallel) {
  lmlrsga::ExperimentConfig cfg = lmlrsga::load_config(config_path);
  if (seed) {
    cfg.seed = *seed;
  }
  const auto summary = lmlrsga::run_experiment(cfg, out_dir, parallel);
  for (const auto& r : summary.runs) {
    std::printf("%-12s %-14s %-9s rho=%-12s %s\n", r.game.c_str(), r.optimizer.c_str(),
                lmlrsga::to_string(r.status).c_str(),
                r.report.spectral_radius ? lmlrsga::format_double(*r.report.spectral_radius).c_str() : "-",
                r.report.stability_class ? lmlrsga::to_string(*r.report.stability_class).c_str() : "-");
    if (!r.message.empty()) std::printf("    %s\n", r.message.c_str());
    for (const auto& w : r.warnings) std::fprintf(stderr, "warning: %s/%s: %s\n", r.game.c_str(), r.optimizer.c_str(), w.c_str());
  }
  std::printf("summary: %s\n", (summary.output_dir / "summary.csv").string().c_str());
  return summary.any_failed() ? kExitNumerical : kExitOk;
}

int analyze_command(const std::string& csv, const std::string& dims_text, std::size_t rank, double eps,
                    const std::string& out_path) {
  const lmlrsga::GameDims dims = parse_dims(dims_text);
  const lmlrsga::TrajectoryLog log = lmlrsga::read_trajectory_csv(csv, dims);
  lmlrsga::SpectralParams params;
  params.rank = rank;
  params.eps = eps;
  try {
    params.validate();
  } catch (const lmlrsga::UsageError& e) {
    throw lmlrsga::ConfigError(e.what());
  }
  const std::string text = lmlrsga::report_to_json(lmlrsga::analyze(log, params)).dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out || !(out << text)) throw lmlrsga::IoError("cannot write '" + out_path + "'");
  }
  return kExitOk;
}

int plot_command(const std::string& run_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(run_dir)) throw lmlrsga::IoError("'" + run_dir + "' is not a directory");
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "report.json" &&
        fs::exists(entry.path().parent_path() / "trajectory.csv")) {
      dirs.push_back(entry.path().parent_path());
    }
  }
  if (dirs.empty()) throw lmlrsga::IoError("no run directories (report.json + trajectory.csv) under '" + run_dir + "'");
  std::sort(dirs.begin(), dirs.end());
  for (const auto& dir : dirs) {
    std::ifstream in(dir / "report.json");
    lmlrsga::Json j;
    try {
      j = lmlrsga::Json::parse(in);
    } catch (const lmlrsga::Json::exception& e) {
      throw lmlrsga::IoError((dir / "report.json").string() + ": " + e.what());
    }
    const lmlrsga::SpectralReport report = lmlrsga::report_from_json(j);
    if (!j.contains("run")) throw lmlrsga::IoError((dir / "report.json").string() + ": missing run metadata");
    const lmlrsga::GameDims dims(j["run"].at("m").get<std::size_t>(), j["run"].at("n").get<std::size_t>());
    const auto log = lmlrsga::read_trajectory_csv((dir / "trajectory.csv").string(), dims);
    const std::string title = j["run"].value("game", std::string("game")) + " / " + j["run"].value("optimizer", std::string("optimizer"));
    const auto result = lmlrsga::emit_plots(log, report, dir, title);
    for (const auto& f : result.files) std::printf("%s\n", (dir / f).string().c_str());
    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s: %s\n", dir.string().c_str(), w.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Competitive optimization experiments: LM-LRSGA and friends"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned parallel = 1;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--parallel", parallel, "Concurrent runs")->check(CLI::PositiveNumber);

  std::string trajectory;
  std::string dims;
  std::size_t rank = 40;
  double eps = 0.05;
  std::string report_out;
  auto* analyze = app.add_subcommand("analyze", "Spectral analysis of a trajectory CSV");
  analyze->add_option("--trajectory", trajectory, "Trajectory CSV")->required();
  analyze->add_option("--dims", dims, "Player dimensions m,n")->required();
  analyze->add_option("--rank", rank, "Reduced operator rank");
  analyze->add_option("--eps", eps, "Stability tolerance band");
  analyze->add_option("--out", report_out, "Write the report here instead of stdout");

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot", "Render plots for every run under a directory");
  plot->add_option("--run", plot_dir, "Run output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return run_command(config_path, out_dir, seed, parallel);
    if (*analyze) return analyze_command(trajectory, dims, rank, eps, report_out);
    if (*plot) return plot_command(plot_dir);
  } catch (const lmlrsga::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const lmlrsga::UsageError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const lmlrsga::CapabilityError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kExitConfig;
  } catch (const lmlrsga::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const lmlrsga::IoError& e) {
    std::fprintf(stderr, "I/O failure: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "I/O failure: %s\n", e.what());
    return kExitIo;
  }
  return kExitConfig;
}
