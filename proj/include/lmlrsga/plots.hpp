#pragma once

// Minimal SVG rendering of run diagnostics: losses on a log axis, a rolling
// stability metric, the fitted spectrum against the unit circle, parameter
// distances from initialization, and the generator-variance indicator.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lmlrsga/spectral.hpp"

namespace lmlrsga {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotResult {
  std::vector<std::string> files;     // names relative to the output directory
  std::vector<std::string> warnings;
};

namespace svg {

inline constexpr double kWidth = 640;
inline constexpr double kHeight = 400;
inline constexpr double kMargin = 56;

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  return palette[i % 4];
}

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kWidth - 2 * kMargin); }
  double py(double y) const { return kHeight - kMargin - (y - y0) / (y1 - y0) * (kHeight - 2 * kMargin); }
};

inline Frame fit_frame(const std::vector<Series>& series) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) return {0, 1, 0, 1};
  if (x1 <= x0) x1 = x0 + 1;
  if (y1 <= y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  return {x0, x1, y0, y1};
}

inline void header(std::ostream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
     << title << "</text>\n";
}

inline void axes(std::ostream& os, const Frame& f, const std::string& xlabel, const std::string& ylabel, bool log_y) {
  os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kWidth - 2 * kMargin << "\" height=\""
     << kHeight - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
    os << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << kHeight - kMargin + 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(xv) << "</text>\n";
  }
  if (log_y) {
    for (double e = std::ceil(f.y0); e <= std::floor(f.y1); e += 1.0) {
      os << "<text x=\"" << kMargin - 6 << "\" y=\"" << num(f.py(e) + 4)
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << static_cast<int>(e) << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
      os << "<text x=\"" << kMargin - 6 << "\" y=\"" << num(f.py(yv) + 4)
         << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yv) << "</text>\n";
    }
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xlabel << "</text>\n"
     << "<text x=\"14\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 14 " << kHeight / 2
     << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << ylabel << "</text>\n";
}

// Line chart. With log_y, non-positive values cannot be placed and are skipped.
inline std::string line_chart(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                              std::vector<Series> series, bool log_y) {
  if (log_y) {
    for (auto& s : series) {
      for (auto& v : s.y) v = (std::isfinite(v) && v > 0.0) ? std::log10(v) : NAN;
    }
  }
  const Frame f = fit_frame(series);
  std::ostringstream os;
  header(os, title);
  axes(os, f, xlabel, ylabel, log_y);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    os << "<polyline data-series=\"" << s.name << "\" fill=\"none\" stroke=\"" << color(i)
       << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t j = 0; j < s.x.size(); ++j) {
      if (!std::isfinite(s.y[j])) continue;
      if (!first) os << ' ';
      os << num(f.px(s.x[j])) << ',' << num(f.py(s.y[j]));
      first = false;
    }
    os << "\"/>\n";
    os << "<text x=\"" << kWidth - kMargin - 4 << "\" y=\"" << kMargin + 16 + 14 * i
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color(i) << "\">" << s.name
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Eigenvalue scatter with the dashed unit circle.
inline std::string eigen_scatter(const std::string& title, const std::vector<Complex>& values) {
  double extent = 1.2;
  for (const auto& v : values) extent = std::max(extent, 1.1 * std::max(std::abs(v.real()), std::abs(v.imag())));
  const Frame f{-extent, extent, -extent, extent};
  std::ostringstream os;
  header(os, title);
  axes(os, f, "Re", "Im", false);
  const double rx = f.px(1.0) - f.px(0.0);
  const double ry = f.py(0.0) - f.py(1.0);
  os << "<ellipse class=\"unit-circle\" cx=\"" << num(f.px(0)) << "\" cy=\"" << num(f.py(0)) << "\" rx=\"" << num(rx)
     << "\" ry=\"" << num(ry) << "\" fill=\"none\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  for (const auto& v : values) {
    os << "<circle class=\"eig\" data-re=\"" << num(v.real()) << "\" data-im=\"" << num(v.imag()) << "\" cx=\""
       << num(f.px(v.real())) << "\" cy=\"" << num(f.py(v.imag())) << "\" r=\"3.5\" fill=\"" << color(0) << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace svg

namespace detail {
inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}
}  // namespace detail

// Writes one SVG per panel into `dir`. An empty log produces no plots.
inline PlotResult emit_plots(const TrajectoryLog& log, const SpectralReport& report, const std::filesystem::path& dir,
                             const std::string& title, std::size_t window = 20) {
  PlotResult result;
  if (log.empty()) {
    result.warnings.emplace_back("empty trajectory: no plots written");
    return result;
  }
  const auto& snaps = log.snapshots();
  std::vector<double> ks;
  for (const auto& s : snaps) ks.push_back(static_cast<double>(s.k));

  auto emit = [&](const std::string& name, const std::string& text) {
    detail::write_text(dir / name, text);
    result.files.push_back(name);
  };

  {
    Series f{"|loss_f|", ks, {}};
    Series g{"|loss_g|", ks, {}};
    for (const auto& s : snaps) {
      f.y.push_back(std::abs(s.loss_f));
      g.y.push_back(std::abs(s.loss_g));
    }
    emit("losses.svg", svg::line_chart(title + ": losses", "iteration", "|loss| (log scale)", {f, g}, true));
  }
  {
    // Rolling global stability over trailing windows.
    Series s{"global stability", {}, {}};
    const std::size_t w = std::max<std::size_t>(2, window);
    for (std::size_t end = 1; end <= snaps.size(); ++end) {
      const std::size_t start = end > w ? end - w : 0;
      Vector mean = Vector::Zero(snaps[start].w.size());
      for (std::size_t j = start; j < end; ++j) mean += snaps[j].w;
      mean /= static_cast<double>(end - start);
      double acc = 0.0;
      for (std::size_t j = start; j < end; ++j) acc += (snaps[j].w - mean).squaredNorm();
      s.x.push_back(ks[end - 1]);
      s.y.push_back(normalize_variability(std::sqrt(acc / static_cast<double>(end - start))));
    }
    emit("stability.svg", svg::line_chart(title + ": stability", "iteration", "stability index", {s}, false));
  }
  if (report.spectral_radius) {
    emit("eigenvalues.svg", svg::eigen_scatter(title + ": spectrum", report.eigenvalues));
  } else {
    result.warnings.emplace_back("no spectrum: eigenvalue plot skipped");
  }
  if (log.full_state()) {
    const auto m = static_cast<Eigen::Index>(log.dims().m);
    const auto n = static_cast<Eigen::Index>(log.dims().n);
    Series g{"||theta_G - theta_G(0)||", ks, {}};
    Series d{"||theta_D - theta_D(0)||", ks, {}};
    Series var{"generator variance", ks, {}};
    for (const auto& s : snaps) {
      g.y.push_back((s.w.head(m) - snaps.front().w.head(m)).norm());
      d.y.push_back((s.w.tail(n) - snaps.front().w.tail(n)).norm());
      const auto head = s.w.head(m);
      var.y.push_back(m >= 2 ? (head.array() - head.mean()).square().mean() : head.squaredNorm());
    }
    emit("param_distance.svg", svg::line_chart(title + ": distance from init", "iteration", "distance", {g, d}, false));
    emit("mode_collapse.svg", svg::line_chart(title + ": mode-collapse indicator", "iteration",
                                              m >= 2 ? "variance of theta_G" : "theta_G^2", {var}, false));
  } else {
    Series g{"||x||", ks, {}};
    Series d{"||y||", ks, {}};
    for (const auto& s : snaps) {
      g.y.push_back(s.w[0]);
      d.y.push_back(s.w[1]);
    }
    emit("param_distance.svg", svg::line_chart(title + ": parameter norms", "iteration", "norm", {g, d}, false));
    result.warnings.emplace_back("norm-only log: mode-collapse plot skipped");
  }
  return result;
}

}  // namespace lmlrsga
