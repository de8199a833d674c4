#pragma once

#include <set>
#include <string>

#include "nftsim/experiment.hpp"
#include "nftsim/io.hpp"

namespace nftsim::experiment {

inline Preset preset_from_name(const std::string& s) {
  if (s == "sim1") return Preset::sim1;
  if (s == "sim2") return Preset::sim2;
  if (s == "sim3") return Preset::sim3;
  if (s == "custom") return Preset::custom;
  throw std::invalid_argument("unknown preset '" + s + "'");
}

namespace detail {

inline void check_keys(const io::IniData& ini, const std::string& section,
                       const std::set<std::string>& allowed) {
  auto it = ini.find(section);
  if (it == ini.end()) return;
  for (const auto& [k, v] : it->second)
    if (!allowed.count(k))
      throw std::invalid_argument("config: unknown key '" + k + "' in [" + section + "]");
}

inline std::string get(const io::IniData& ini, const std::string& sec, const std::string& key,
                       const std::string& fallback) {
  auto s = ini.find(sec);
  if (s == ini.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

}  // namespace detail

/// Schema-validated config loading; unknown sections/keys are rejected and
/// presets lock the [plan] and [link] sections to their Table-I values.
inline ExperimentConfig config_from_ini(const io::IniData& ini) {
  static const std::set<std::string> known_sections = {"experiment", "plan", "link", "rx", "dac",
                                                       "pic"};
  for (const auto& [sec, kv] : ini)
    if (!known_sections.count(sec))
      throw std::invalid_argument("config: unknown section [" + sec + "]");
  detail::check_keys(ini, "experiment",
             {"preset", "seed", "n_bits", "n_training", "equalizers", "distances_km", "noise",
              "paper_scale", "nn_hidden", "t_fwhm_ps"});
  detail::check_keys(ini, "plan", {"n_channels", "delta_t_ps", "delta_f_ghz", "window_ps", "downtime_ps"});
  detail::check_keys(ini, "link",
             {"launch_power_dbm", "span_length_km", "dispersion_d", "attenuation_db_km",
              "kerr_gamma", "center_wavelength_nm", "span_nf_db", "step_dz_km"});
  detail::check_keys(ini, "rx", {"filter_bw_ghz", "adc_rate_gsa"});
  detail::check_keys(ini, "dac", {"bits", "bandwidth_ghz", "rate_gsa"});
  detail::check_keys(ini, "pic", {"off_chip_peak_dbm", "mmi_loss_db", "mux_bw_ghz", "mux_order",
                          "mux_ripple_db"});

  const auto preset = preset_from_name(detail::get(ini, "experiment", "preset", "sim2"));
  if (preset != Preset::custom) {
    if (ini.count("plan") && !ini.at("plan").empty())
      throw std::invalid_argument("config: presets lock [plan] to Table-I values");
    if (ini.count("link") && !ini.at("link").empty())
      throw std::invalid_argument("config: presets lock [link] to Table-I values");
  }

  const bool paper = ini.count("experiment") &&
                     io::parse_bool(detail::get(ini, "experiment", "paper_scale", "false"), "paper_scale");
  ExperimentConfig cfg =
      paper ? make_paper_scale(preset) : make_preset(preset);

  cfg.seed = static_cast<std::uint64_t>(
      io::parse_int(detail::get(ini, "experiment", "seed", "1"), "seed"));
  cfg.n_bits = static_cast<std::uint64_t>(
      io::parse_int(detail::get(ini, "experiment", "n_bits", std::to_string(cfg.n_bits)), "n_bits"));
  cfg.n_training = static_cast<std::uint64_t>(io::parse_int(
      detail::get(ini, "experiment", "n_training", std::to_string(cfg.n_training)), "n_training"));
  cfg.noise_on = io::parse_bool(detail::get(ini, "experiment", "noise", "true"), "noise");
  cfg.nn_hidden = static_cast<int>(
      io::parse_int(detail::get(ini, "experiment", "nn_hidden", std::to_string(cfg.nn_hidden)),
                    "nn_hidden"));
  cfg.t_fwhm_ps = io::parse_double(
      detail::get(ini, "experiment", "t_fwhm_ps", io::fmt_num(cfg.t_fwhm_ps)), "t_fwhm_ps");
  if (const std::string eqs = detail::get(ini, "experiment", "equalizers", ""); !eqs.empty()) {
    cfg.equalizers.clear();
    for (const auto& t : io::split_list(eqs)) cfg.equalizers.push_back(eq_from_name(t));
  }
  if (const std::string ds = detail::get(ini, "experiment", "distances_km", ""); !ds.empty()) {
    cfg.distances_km.clear();
    for (const auto& t : io::split_list(ds)) cfg.distances_km.push_back(io::parse_double(t, "distance"));
  }

  if (preset == Preset::custom) {
    cfg.plan.n_channels = static_cast<int>(io::parse_int(detail::get(ini, "plan", "n_channels", "4"), "n_channels"));
    cfg.plan.delta_t_ps = io::parse_double(detail::get(ini, "plan", "delta_t_ps", "150"), "delta_t_ps");
    cfg.plan.delta_f_ghz = io::parse_double(detail::get(ini, "plan", "delta_f_ghz", "10"), "delta_f_ghz");
    cfg.plan.window_ps = io::parse_double(detail::get(ini, "plan", "window_ps", "600"), "window_ps");
    cfg.plan.downtime_ps = io::parse_double(detail::get(ini, "plan", "downtime_ps", "0"), "downtime_ps");
    cfg.link.launch_power_dbm =
        io::parse_double(detail::get(ini, "link", "launch_power_dbm", "4.88"), "launch_power_dbm");
    cfg.link.fiber.span_length_km =
        io::parse_double(detail::get(ini, "link", "span_length_km", "50"), "span_length_km");
    cfg.link.fiber.dispersion_d =
        io::parse_double(detail::get(ini, "link", "dispersion_d", "4.5"), "dispersion_d");
    cfg.link.fiber.attenuation_db_km =
        io::parse_double(detail::get(ini, "link", "attenuation_db_km", "0.2"), "attenuation_db_km");
    cfg.link.fiber.kerr_gamma = io::parse_double(detail::get(ini, "link", "kerr_gamma", "1.6"), "kerr_gamma");
    cfg.link.fiber.center_wavelength_nm =
        io::parse_double(detail::get(ini, "link", "center_wavelength_nm", "1550"), "center_wavelength_nm");
    cfg.link.span_amp.nf_db = io::parse_double(detail::get(ini, "link", "span_nf_db", "5"), "span_nf_db");
    cfg.link.step.dz_km = io::parse_double(detail::get(ini, "link", "step_dz_km", "0.1"), "step_dz_km");
    cfg.rxcfg.window_ps = cfg.plan.window_ps;
    cfg.rxcfg.lo_frequencies_ghz.clear();
    for (int k = 0; k < cfg.plan.n_channels; ++k)
      cfg.rxcfg.lo_frequencies_ghz.push_back(cfg.plan.carrier_offset_ghz(k));
  }
  cfg.rxcfg.optical_filter.bw_3db_ghz =
      io::parse_double(detail::get(ini, "rx", "filter_bw_ghz", "7"), "filter_bw_ghz");
  cfg.rxcfg.adc_rate_gsa = io::parse_double(detail::get(ini, "rx", "adc_rate_gsa", "80"), "adc_rate_gsa");
  cfg.dac.bits = static_cast<int>(io::parse_int(detail::get(ini, "dac", "bits", "6"), "dac bits"));
  cfg.dac.bandwidth_ghz = io::parse_double(detail::get(ini, "dac", "bandwidth_ghz", "20"), "dac bandwidth");
  cfg.dac.rate_gsa = io::parse_double(detail::get(ini, "dac", "rate_gsa", "92"), "dac rate");
  cfg.pic.off_chip_peak_dbm =
      io::parse_double(detail::get(ini, "pic", "off_chip_peak_dbm", "-20.6"), "off_chip_peak_dbm");
  cfg.pic.mmi_loss_db = io::parse_double(detail::get(ini, "pic", "mmi_loss_db", "3"), "mmi_loss_db");
  cfg.pic.mux_filter.bw_3db_ghz = io::parse_double(detail::get(ini, "pic", "mux_bw_ghz", "17.5"), "mux_bw_ghz");
  cfg.pic.mux_filter.order = static_cast<int>(io::parse_int(detail::get(ini, "pic", "mux_order", "4"), "mux_order"));
  cfg.pic.mux_filter.ripple_db = io::parse_double(detail::get(ini, "pic", "mux_ripple_db", "0.5"), "mux_ripple_db");
  return cfg;
}

}  // namespace nftsim::experiment
