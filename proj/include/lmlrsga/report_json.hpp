#pragma once

// JSON form of SpectralReport. Eigenvalues are [re, im] pairs; fields that
// could not be computed are null and listed under "missing".

#include <string>

#include <json.hpp>

#include "lmlrsga/spectral.hpp"

namespace lmlrsga {

namespace detail {
template <class T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}
}  // namespace detail

inline nlohmann::json report_to_json(const SpectralReport& r) {
  nlohmann::json eig = nlohmann::json::array();
  for (const auto& v : r.eigenvalues) eig.push_back({v.real(), v.imag()});
  nlohmann::json j;
  j["spectral_radius"] = detail::optional_json(r.spectral_radius);
  j["stability_class"] = r.stability_class ? nlohmann::json(to_string(*r.stability_class)) : nlohmann::json(nullptr);
  j["eigenvalues"] = std::move(eig);
  j["high_freq_power_ratio"] = detail::optional_json(r.high_freq_power_ratio);
  j["loss_stability"] = detail::optional_json(r.loss_stability);
  j["mode_collapse_trend"] = detail::optional_json(r.mode_collapse_trend);
  j["mode_collapse"] = r.mode_collapse_high ? nlohmann::json(*r.mode_collapse_high ? "High" : "Low")
                                            : nlohmann::json(nullptr);
  j["global_stability"] = detail::optional_json(r.global_stability);
  j["rank"] = r.rank;
  j["requested_rank"] = r.requested_rank;
  j["eps"] = r.eps;
  j["flags"] = r.flags;
  j["missing"] = r.missing;
  return j;
}

inline SpectralReport report_from_json(const nlohmann::json& j) {
  SpectralReport r;
  try {
    for (const auto& pair : j.at("eigenvalues")) r.eigenvalues.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
    r.spectral_radius = detail::optional_from<double>(j, "spectral_radius");
    if (auto cls = detail::optional_from<std::string>(j, "stability_class")) {
      r.stability_class = parse_stability_class(*cls);
      if (!r.stability_class) throw IoError("report JSON: unknown stability_class '" + *cls + "'");
    }
    r.high_freq_power_ratio = detail::optional_from<double>(j, "high_freq_power_ratio");
    r.loss_stability = detail::optional_from<double>(j, "loss_stability");
    r.mode_collapse_trend = detail::optional_from<double>(j, "mode_collapse_trend");
    if (auto label = detail::optional_from<std::string>(j, "mode_collapse")) r.mode_collapse_high = *label == "High";
    r.global_stability = detail::optional_from<double>(j, "global_stability");
    r.rank = j.at("rank").get<std::size_t>();
    r.requested_rank = j.at("requested_rank").get<std::size_t>();
    r.eps = j.at("eps").get<double>();
    r.flags = j.at("flags").get<std::vector<std::string>>();
    r.missing = j.at("missing").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("report JSON: ") + e.what());
  }
  return r;
}

}  // namespace lmlrsga
