#pragma once

// Scenario configuration files.
//
// Flat key = value text with sections:
//   [scenario]   name, delay_ps, samples, repeats, seed, jitter_mode, orthogonal_modes, fixed_phase_rad
//   [pulse]      width_fwhm_ps | tau_p_ps;
//                bandwidth_fwhm_ghz | bandwidth_fw10_nm | beta_per_ps2;
//                wavelength_nm | nu0_ghz; intensity
//   [source_a]   jitter_fwhm_ps, phase_random
//   [source_b]   jitter_fwhm_ps, phase_random
//   [filter]     shape (gaussian | flat_top), fwhm_ghz
//   [detectors]  efficiency, jitter_fwhm_ps, dark_rate_hz, dead_time_ps
//   [counting]   mu_port, clock_period_ps, pulses, splitter_ratio, gate_ps, bin_width_ps
//   [scan]       delay_min_ps, delay_max_ps, delay_step_ps
// '#' starts a comment. Unknown sections or keys are errors.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pulsehom/photon_counting.hpp"

namespace pulsehom {

struct ScanRange {
    double delay_min = -200.0;
    double delay_max = 200.0;
    double delay_step = 10.0;
};

struct LoadedConfig {
    std::string name;
    PulseShape source_pulse{1.0, 0.0};  // as emitted, before any filter
    std::optional<FilterSpec> filter;
    CountingConfig counting;  // counting.scenario holds the pulse after filtering
    ScanRange scan;
    // Modelling conventions in effect, recorded in every result file.
    std::vector<std::string> decisions;

    const ScenarioConfig& scenario() const { return counting.scenario; }
    ScenarioConfig& scenario() { return counting.scenario; }
};

LoadedConfig parse_config(std::string_view text, std::string_view default_name = "scenario");
LoadedConfig load_config(const std::filesystem::path& path);

}  // namespace pulsehom
