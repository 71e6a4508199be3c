#pragma once

// File formats shared with downstream tools.
//
//   time tags   "C,<ps>" / "D,<ps>", one click per line, time ordered
//   histogram   CSV "bin_center_ps,count"
//   delay scan  CSV "delay_ps,g2,stderr"
//   results     JSON {scenario, g2, g2_stderr, vhom, n_samples, seed, decisions[], ...}

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pulsehom/monte_carlo.hpp"
#include "pulsehom/photon_counting.hpp"

namespace pulsehom {

using Json = nlohmann::ordered_json;

void write_timetags(std::ostream& out, const ClickStreams& streams);
void write_timetags(const std::filesystem::path& path, const ClickStreams& streams);
// Reads a time-tag file back; clock period and pulse count are not stored
// in the file and must be supplied.
ClickStreams read_timetags(const std::filesystem::path& path, double clock_period,
                           std::uint64_t total_pulses);

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist);
void write_scan_csv(std::ostream& out, const ScanResult& scan);

Json pulse_json(const PulseShape& pulse);

Json result_json(const std::string& scenario_name, const ScenarioConfig& config,
                 const RunResult& result, const std::vector<std::string>& decisions);

Json visibility_json(const HistogramVisibility& v);

// Writes text to a file, throwing InputError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace pulsehom
