#pragma once

// JSON mappings for parameters, configs and reports (nlohmann/json).
// Readers start from the C++ defaults and override only the keys present.

#include <string>
#include <vector>

#include <json.hpp>

#include "phasevib/gabor.hpp"
#include "phasevib/magnify.hpp"
#include "phasevib/modal.hpp"
#include "phasevib/pme.hpp"
#include "phasevib/synth.hpp"

namespace phasevib {

using json = nlohmann::ordered_json;

/// Overwrites `dst` only when `key` is present and not null.
template <class T>
void read_json_opt(const json& j, const char* key, T& dst) {
  if (j.contains(key) && !j.at(key).is_null()) j.at(key).get_to(dst);
}

inline void to_json(json& j, const PixelPoint& p) { j = json::array({p.x, p.y}); }
inline void from_json(const json& j, PixelPoint& p) {
  if (!j.is_array() || j.size() != 2) throw Error("ROI point must be [x, y]", "config");
  p.x = j[0].get<int>();
  p.y = j[1].get<int>();
}

inline void to_json(json& j, const GaborParams& p) {
  j = json{{"lambda", p.lambda}, {"theta", p.theta}, {"psi", p.psi}, {"sigma", p.sigma}, {"gamma", p.gamma}};
}
/// A missing sigma follows the default tie sigma = lambda / 2.
inline void from_json(const json& j, GaborParams& p) {
  read_json_opt(j, "lambda", p.lambda);
  read_json_opt(j, "theta", p.theta);
  read_json_opt(j, "psi", p.psi);
  read_json_opt(j, "gamma", p.gamma);
  p.sigma = p.lambda / 2.0;
  read_json_opt(j, "sigma", p.sigma);
}

inline void to_json(json& j, const BandpassSpec& s) {
  j = json{{"center_hz", s.center_hz}, {"width_hz", s.width_hz}, {"alpha", s.alpha}};
}
inline void from_json(const json& j, BandpassSpec& s) {
  read_json_opt(j, "center_hz", s.center_hz);
  read_json_opt(j, "width_hz", s.width_hz);
  read_json_opt(j, "alpha", s.alpha);
}

inline void to_json(json& j, const ModePeak& p) {
  j = json{{"frequency_hz", p.frequency_hz}, {"magnitude", p.magnitude}, {"prominence", p.prominence}};
}
inline void from_json(const json& j, ModePeak& p) {
  read_json_opt(j, "frequency_hz", p.frequency_hz);
  read_json_opt(j, "magnitude", p.magnitude);
  read_json_opt(j, "prominence", p.prominence);
}

inline void to_json(json& j, const PeakOptions& o) {
  j = json{{"min_prominence_fraction", o.min_prominence_fraction},
           {"min_separation_hz", o.min_separation_hz},
           {"max_peaks", o.max_peaks}};
}
inline void from_json(const json& j, PeakOptions& o) {
  read_json_opt(j, "min_prominence_fraction", o.min_prominence_fraction);
  read_json_opt(j, "min_separation_hz", o.min_separation_hz);
  read_json_opt(j, "max_peaks", o.max_peaks);
}

inline void to_json(json& j, const DamageThresholds& t) {
  j = json{{"freq_threshold_hz", t.freq_threshold_hz}, {"mac_threshold", t.mac_threshold}};
}
inline void from_json(const json& j, DamageThresholds& t) {
  read_json_opt(j, "freq_threshold_hz", t.freq_threshold_hz);
  read_json_opt(j, "mac_threshold", t.mac_threshold);
}

inline void to_json(json& j, const BandGainReport& r) {
  json peaks = json::array();
  for (const auto& p : r.out_of_band_peaks) peaks.push_back({{"frequency_hz", p.frequency_hz}, {"gain", p.gain}});
  j = json{{"spec", r.spec}, {"in_band_gain", r.in_band_gain}, {"out_of_band_gain", r.out_of_band_gain},
           {"out_of_band_peaks", peaks}};
}

inline void to_json(json& j, const DamageReport& r) {
  json modes = json::array();
  for (std::size_t i = 0; i < r.baseline_hz.size(); ++i) {
    json m{{"mode", i + 1},
           {"baseline_hz", r.baseline_hz[i]},
           {"test_hz", r.test_hz[i]},
           {"frequency_shift_hz", r.frequency_shift_hz[i]}};
    m["mac"] = i < r.mac.size() ? json(r.mac[i]) : json(nullptr);
    modes.push_back(m);
  }
  j = json{{"verdict", to_string(r.verdict)}, {"thresholds", r.thresholds}, {"modes", modes}};
}

inline void to_json(json& j, const DeflectionShape& s) {
  j = json{{"frequency_hz", s.frequency_hz}, {"span_m", s.span_m}, {"displacement", s.displacement}};
}

namespace synth {

inline void to_json(json& j, const GaussianSurfaceConfig& c) {
  j = json{{"amplitude", c.amplitude},
           {"std_px", c.std_px},
           {"width", c.width},
           {"height", c.height},
           {"background", c.background},
           {"damping_ratio", c.damping_ratio},
           {"natural_frequency_rad_s", c.natural_frequency_rad_s},
           {"peak_displacement_px", c.peak_displacement_px},
           {"frame_rate_hz", c.frame_rate_hz},
           {"frame_count", c.frame_count},
           {"noise_std", c.noise_std},
           {"seed", c.seed},
           {"bit_depth", c.bit_depth}};
}
inline void from_json(const json& j, GaussianSurfaceConfig& c) {
  read_json_opt(j, "amplitude", c.amplitude);
  read_json_opt(j, "std_px", c.std_px);
  read_json_opt(j, "width", c.width);
  read_json_opt(j, "height", c.height);
  read_json_opt(j, "background", c.background);
  read_json_opt(j, "damping_ratio", c.damping_ratio);
  read_json_opt(j, "natural_frequency_rad_s", c.natural_frequency_rad_s);
  read_json_opt(j, "peak_displacement_px", c.peak_displacement_px);
  read_json_opt(j, "frame_rate_hz", c.frame_rate_hz);
  read_json_opt(j, "frame_count", c.frame_count);
  read_json_opt(j, "noise_std", c.noise_std);
  read_json_opt(j, "seed", c.seed);
  read_json_opt(j, "bit_depth", c.bit_depth);
}

inline void to_json(json& j, const BeamMode& m) {
  j = json{{"index", m.index},
           {"frequency_hz", m.frequency_hz},
           {"tip_amplitude_px", m.tip_amplitude_px},
           {"damping_ratio", m.damping_ratio}};
}
inline void from_json(const json& j, BeamMode& m) {
  read_json_opt(j, "index", m.index);
  read_json_opt(j, "frequency_hz", m.frequency_hz);
  read_json_opt(j, "tip_amplitude_px", m.tip_amplitude_px);
  read_json_opt(j, "damping_ratio", m.damping_ratio);
}

inline void to_json(json& j, const BeamSceneConfig& c) {
  j = json{{"width", c.width},
           {"height", c.height},
           {"root_x_px", c.root_x_px},
           {"length_px", c.length_px},
           {"length_m", c.length_m},
           {"center_y_px", c.center_y_px},
           {"thickness_px", c.thickness_px},
           {"foreground", c.foreground},
           {"background", c.background},
           {"modes", c.modes},
           {"tip_mass_fraction", c.tip_mass_fraction},
           {"noise_std", c.noise_std},
           {"seed", c.seed},
           {"frame_rate_hz", c.frame_rate_hz},
           {"frame_count", c.frame_count},
           {"supersample", c.supersample},
           {"pme_wavelength_px", c.pme_wavelength_px},
           {"bit_depth", c.bit_depth}};
}
inline void from_json(const json& j, BeamSceneConfig& c) {
  read_json_opt(j, "width", c.width);
  read_json_opt(j, "height", c.height);
  read_json_opt(j, "root_x_px", c.root_x_px);
  read_json_opt(j, "length_px", c.length_px);
  read_json_opt(j, "length_m", c.length_m);
  read_json_opt(j, "center_y_px", c.center_y_px);
  read_json_opt(j, "thickness_px", c.thickness_px);
  read_json_opt(j, "foreground", c.foreground);
  read_json_opt(j, "background", c.background);
  read_json_opt(j, "modes", c.modes);
  read_json_opt(j, "tip_mass_fraction", c.tip_mass_fraction);
  read_json_opt(j, "noise_std", c.noise_std);
  read_json_opt(j, "seed", c.seed);
  read_json_opt(j, "frame_rate_hz", c.frame_rate_hz);
  read_json_opt(j, "frame_count", c.frame_count);
  read_json_opt(j, "supersample", c.supersample);
  read_json_opt(j, "pme_wavelength_px", c.pme_wavelength_px);
  read_json_opt(j, "bit_depth", c.bit_depth);
}

}  // namespace synth

}  // namespace phasevib
