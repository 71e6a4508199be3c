#include "pulsehom/formats.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "pulsehom/errors.hpp"

namespace pulsehom {

void write_timetags(std::ostream& out, const ClickStreams& streams) {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < streams.c.size() || j < streams.d.size()) {
        const bool take_c =
            j == streams.d.size() || (i < streams.c.size() && streams.c[i] <= streams.d[j]);
        if (take_c)
            out << "C," << streams.c[i++] << '\n';
        else
            out << "D," << streams.d[j++] << '\n';
    }
}

void write_timetags(const std::filesystem::path& path, const ClickStreams& streams) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write " + path.string());
    write_timetags(out, streams);
    if (!out) throw InputError("failed writing " + path.string());
}

ClickStreams read_timetags(const std::filesystem::path& path, double clock_period,
                           std::uint64_t total_pulses) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open time-tag file " + path.string());
    ClickStreams streams;
    streams.clock_period = clock_period;
    streams.total_pulses = total_pulses;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::int64_t t = 0;
        const char* first = line.data() + 2;
        const char* last = line.data() + line.size();
        const bool ok = line.size() > 2 && line[1] == ',' && (line[0] == 'C' || line[0] == 'D') &&
                        std::from_chars(first, last, t).ptr == last;
        if (!ok) throw InputError(fmt::format("{}:{}: malformed time tag '{}'", path.string(), line_no, line));
        (line[0] == 'C' ? streams.c : streams.d).push_back(t);
    }
    if (!std::is_sorted(streams.c.begin(), streams.c.end()) ||
        !std::is_sorted(streams.d.begin(), streams.d.end()))
        throw InputError(path.string() + ": time tags are not in time order");
    return streams;
}

void write_histogram_csv(std::ostream& out, const CoincidenceHistogram& hist) {
    out << "bin_center_ps,count\n";
    for (const auto& [bin, n] : hist.counts)
        out << fmt::format("{:.17g},{}\n", bin * hist.bin_width, n);
}

void write_scan_csv(std::ostream& out, const ScanResult& scan) {
    out << "delay_ps,g2,stderr\n";
    for (std::size_t i = 0; i < scan.delays.size(); ++i)
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", scan.delays[i], scan.g2_values[i],
                           scan.std_errors[i]);
}

Json pulse_json(const PulseShape& pulse) {
    return Json{{"tau_p_ps", pulse.tau_p()},
                {"width_fwhm_ps", pulse.duration_fwhm()},
                {"beta_per_ps2", pulse.beta()},
                {"bandwidth_fwhm_ghz", pulse.bandwidth_fwhm()},
                {"transform_limited_bandwidth_ghz", pulse.transform_limited_bandwidth()},
                {"nu0_ghz", pulse.nu0()},
                {"i0", pulse.i0()},
                {"overlap_decay_rate_per_ps2", pulse.overlap_decay_rate()}};
}

Json result_json(const std::string& scenario_name, const ScenarioConfig& config,
                 const RunResult& result, const std::vector<std::string>& decisions) {
    Json j;
    j["scenario"] = scenario_name;
    j["g2"] = result.g2;
    j["g2_stderr"] = result.std_error;
    j["vhom"] = result.vhom;
    j["n_samples"] = config.n_samples;
    j["seed"] = config.rng_seed;
    j["decisions"] = decisions;
    j["n_repeats"] = config.n_repeats;
    j["g2_spread"] = result.spread;
    j["systematic_delay_ps"] = config.systematic_delay;
    j["delay_sigma_ps"] = delay_sigma(config);
    j["analytic_g2"] = config.orthogonal_modes
                           ? 1.0
                           : analytic_g2(config.systematic_delay, delay_sigma(config),
                                         shared_pulse(config));
    j["pulse"] = pulse_json(shared_pulse(config));
    return j;
}

Json visibility_json(const HistogramVisibility& v) {
    return Json{{"vhom", v.v},
                {"shot_noise_error", v.shot_noise_error},
                {"zero_bin_counts", v.zero_bin},
                {"side_bin_mean", v.side_mean}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
    if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace pulsehom
