#include "commands.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "pulsehom/analysis_io.hpp"
#include "pulsehom/config.hpp"
#include "pulsehom/errors.hpp"
#include "pulsehom/formats.hpp"

namespace pulsehom::cli {

namespace {

namespace fs = std::filesystem;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned threads = 1;
    std::string out_dir;
    std::optional<std::uint64_t> samples;
    std::optional<std::uint64_t> repeats;
};

struct ScanOptions {
    std::string delay_range;
    std::optional<double> delay_step;
};

struct HomOptions {
    std::optional<double> gate_ps;
    bool timetags = false;
};

struct AnalyzeOptions {
    std::string trace;
    std::string format = "auto";
    bool quantize = false;
};

struct DeriveOptions {
    double width_fwhm = 0.0;
    std::optional<double> bandwidth;
    std::optional<double> bandwidth_fw10_nm;
    double wavelength_nm = 1550.0;
};

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Output files go to --out-dir when given; the manifest records how to
// regenerate them.
class OutputDir {
public:
    OutputDir(std::string dir, std::string command, const CommonOptions& opts,
              std::optional<std::uint64_t> seed)
        : dir_(std::move(dir)) {
        if (dir_.empty()) return;
        fs::create_directories(dir_);
        Json manifest;
        manifest["config"] = opts.config;
        manifest["command"] = std::move(command);
        manifest["out_dir"] = dir_;
        manifest["seed"] = seed ? Json(*seed) : Json(nullptr);
        manifest["timestamp"] = utc_timestamp();
        write_text_file(fs::path(dir_) / "manifest.json", manifest.dump(2) + "\n");
    }

    void write(const std::string& name, const std::string& text) const {
        if (!dir_.empty()) write_text_file(fs::path(dir_) / name, text);
    }

    bool enabled() const { return !dir_.empty(); }
    fs::path path(const std::string& name) const { return fs::path(dir_) / name; }

private:
    std::string dir_;
};

LoadedConfig load_with_overrides(const CommonOptions& opts) {
    if (opts.config.empty()) throw ConfigError("--config is required");
    LoadedConfig cfg = load_config(opts.config);
    ScenarioConfig& sc = cfg.scenario();
    if (opts.seed) sc.rng_seed = *opts.seed;
    if (opts.samples) sc.n_samples = *opts.samples;
    if (opts.repeats) sc.n_repeats = *opts.repeats;
    validate(sc);
    return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_config = true) {
    if (needs_config) cmd->add_option("--config", opts.config, "scenario config file")->required();
    cmd->add_option("--seed", opts.seed, "RNG seed (overrides the config)");
    cmd->add_option("--threads", opts.threads, "worker threads")->check(CLI::Range(1u, 1024u));
    cmd->add_option("--out-dir", opts.out_dir, "directory for output files");
}

std::string describe_command(const std::vector<std::string>& args) {
    std::string s = "pulsehom";
    for (const auto& a : args) s += " " + a;
    return s;
}

int cmd_simulate(const CommonOptions& opts, const std::vector<std::string>& args, std::ostream& out) {
    LoadedConfig cfg = load_with_overrides(opts);
    const RunResult result = run(cfg.scenario(), opts.threads);
    const Json j = result_json(cfg.name, cfg.scenario(), result, cfg.decisions);
    const std::string text = j.dump(2) + "\n";
    OutputDir dir(opts.out_dir, describe_command(args), opts, cfg.scenario().rng_seed);
    dir.write("simulate.json", text);
    out << text;
    return kOk;
}

std::pair<double, double> parse_range(const std::string& text) {
    const auto sep = text.find(':');
    if (sep == std::string::npos) throw ConfigError("--delay-range expects min:max");
    try {
        std::size_t used = 0;
        const double lo = std::stod(text.substr(0, sep), &used);
        if (used != sep) throw std::invalid_argument(text);
        const std::string rest = text.substr(sep + 1);
        const double hi = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(text);
        return {lo, hi};
    } catch (const std::logic_error&) {
        throw ConfigError("--delay-range expects min:max, got '" + text + "'");
    }
}

int cmd_scan(const CommonOptions& opts, const ScanOptions& scan_opts,
             const std::vector<std::string>& args, std::ostream& out) {
    LoadedConfig cfg = load_with_overrides(opts);
    ScanRange range = cfg.scan;
    if (!scan_opts.delay_range.empty())
        std::tie(range.delay_min, range.delay_max) = parse_range(scan_opts.delay_range);
    if (scan_opts.delay_step) range.delay_step = *scan_opts.delay_step;

    const ScanResult scan =
        scan_delay(cfg.scenario(), range.delay_min, range.delay_max, range.delay_step, opts.threads);
    std::ostringstream csv;
    write_scan_csv(csv, scan);

    Json summary;
    summary["scenario"] = cfg.name;
    summary["seed"] = cfg.scenario().rng_seed;
    summary["n_samples"] = cfg.scenario().n_samples;
    summary["n_repeats"] = cfg.scenario().n_repeats;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < scan.g2_values.size(); ++i)
        if (scan.g2_values[i] > scan.g2_values[peak]) peak = i;
    summary["peak_delay_ps"] = scan.delays[peak];
    summary["peak_g2"] = scan.g2_values[peak];
    try {
        summary["g2_curve_fwhm_ps"] = scan_fwhm(scan);
    } catch (const NumericalError&) {
        summary["g2_curve_fwhm_ps"] = nullptr;
    }
    summary["pulse"] = pulse_json(shared_pulse(cfg.scenario()));
    summary["decisions"] = cfg.decisions;

    OutputDir dir(opts.out_dir, describe_command(args), opts, cfg.scenario().rng_seed);
    dir.write("scan.csv", csv.str());
    dir.write("scan.json", summary.dump(2) + "\n");
    out << csv.str();
    return kOk;
}

int cmd_hom(const CommonOptions& opts, const HomOptions& hom_opts,
            const std::vector<std::string>& args, std::ostream& out) {
    LoadedConfig cfg = load_with_overrides(CommonOptions{opts.config, opts.seed, opts.threads,
                                                         opts.out_dir, std::nullopt, opts.repeats});
    CountingConfig& cc = cfg.counting;
    if (opts.samples) cc.pulses = *opts.samples;
    if (hom_opts.gate_ps) cc.gate_window = *hom_opts.gate_ps;
    validate(cc);

    const ClickStreams streams = simulate_clicks(cc, opts.threads);
    if (streams.c.empty() || streams.d.empty())
        throw NumericalError("no clicks recorded on detector " +
                             std::string(streams.c.empty() ? "C" : "D") +
                             ": check mu_port and detector efficiency");

    const CoincidenceHistogram ungated = build_histogram(streams, cc.bin_width, std::nullopt);
    const HistogramVisibility v_ungated = vhom_from_histogram(ungated);

    Json j;
    j["scenario"] = cfg.name;
    j["seed"] = cc.scenario.rng_seed;
    j["pulses"] = cc.pulses;
    j["mu_port"] = cc.mu_port;
    j["singles_c"] = streams.c.size();
    j["singles_d"] = streams.d.size();
    j["ungated"] = visibility_json(v_ungated);
    j["ungated"]["side_bin_chi2_p"] = side_bin_flatness(ungated).p_value;

    OutputDir dir(opts.out_dir, describe_command(args), opts, cc.scenario.rng_seed);
    std::ostringstream csv;
    write_histogram_csv(csv, ungated);
    dir.write("hom_histogram.csv", csv.str());

    if (cc.gate_window) {
        const CoincidenceHistogram gated = build_histogram(streams, cc.bin_width, cc.gate_window);
        j["gate_ps"] = *cc.gate_window;
        j["gated"] = visibility_json(vhom_from_histogram(gated));
        std::ostringstream gated_csv;
        write_histogram_csv(gated_csv, gated);
        dir.write("hom_histogram_gated.csv", gated_csv.str());
    } else {
        j["gate_ps"] = nullptr;
    }
    j["macroscopic_vhom_analytic"] = cc.scenario.orthogonal_modes
                                         ? 0.0
                                         : analytic_g2(cc.scenario.systematic_delay,
                                                       delay_sigma(cc.scenario),
                                                       shared_pulse(cc.scenario)) - 1.0;
    j["detector"] = Json{{"efficiency", cc.detectors[0].efficiency},
                         {"timing_jitter_fwhm_ps", cc.detectors[0].timing_jitter_fwhm},
                         {"dark_rate_hz", cc.detectors[0].dark_rate},
                         {"dead_time_ps", cc.detectors[0].dead_time}};
    j["pulse"] = pulse_json(shared_pulse(cc.scenario));
    auto decisions = cfg.decisions;
    decisions.emplace_back(
        "photon_counting: threshold detectors with Poissonian photon number per port; click "
        "times drawn from the pulse intensity envelope plus Gaussian detector jitter");
    j["decisions"] = decisions;

    if (hom_opts.timetags && dir.enabled()) write_timetags(dir.path("timetags.txt"), streams);
    const std::string text = j.dump(2) + "\n";
    dir.write("hom.json", text);
    out << text;
    return kOk;
}

TraceFormat parse_format(const std::string& name) {
    if (name == "auto") return TraceFormat::automatic;
    if (name == "values") return TraceFormat::values;
    if (name == "time_intensity") return TraceFormat::time_intensity;
    throw ConfigError("unknown trace format '" + name + "'");
}

int cmd_analyze(const CommonOptions& opts, const AnalyzeOptions& a,
                const std::vector<std::string>& args, std::ostream& out) {
    const IntensityTrace trace = ingest_trace(a.trace, parse_format(a.format), a.quantize);
    const G2Estimate est = estimate_g2(trace);
    Json j;
    j["trace"] = a.trace;
    j["n_samples"] = trace.samples.size();
    j["sample_period_ps"] = trace.sample_period;
    j["quantized_8bit"] = a.quantize;
    j["g2"] = est.g2;
    j["g2_stderr"] = est.std_error;
    j["vhom"] = vhom_from_g2(est.g2);
    const std::string text = j.dump(2) + "\n";
    OutputDir dir(opts.out_dir, describe_command(args), opts, opts.seed);
    dir.write("analyze.json", text);
    out << text;
    return kOk;
}

int cmd_derive(const CommonOptions& opts, const DeriveOptions& d,
               const std::vector<std::string>& args, std::ostream& out) {
    if (d.bandwidth.has_value() == d.bandwidth_fw10_nm.has_value())
        throw ConfigError("derive needs exactly one of --bandwidth or --bandwidth-fw10-nm");
    std::vector<std::string> decisions;
    double bandwidth = 0.0;
    if (d.bandwidth) {
        bandwidth = *d.bandwidth;
    } else {
        bandwidth = fw10_to_fwhm(wavelength_width_to_ghz(*d.bandwidth_fw10_nm, d.wavelength_nm));
        decisions.emplace_back(
            "spectral_width_conversion: full width at 1/10 max converted to FWHM with the Gaussian "
            "ratio sqrt(ln 10 / ln 2) = 1.823");
    }
    decisions.emplace_back("bandwidths are intensity FWHM in linear frequency (GHz)");
    const double tau_p = fwhm_to_sigma(d.width_fwhm);
    const double beta = chirp_from_bandwidth(bandwidth, tau_p);
    const PulseShape pulse(tau_p, beta, kSpeedOfLightNmGhz / d.wavelength_nm);
    Json j;
    j["input_width_fwhm_ps"] = d.width_fwhm;
    j["input_bandwidth_fwhm_ghz"] = bandwidth;
    j["pulse"] = pulse_json(pulse);
    j["decisions"] = decisions;
    const std::string text = j.dump(2) + "\n";
    OutputDir dir(opts.out_dir, describe_command(args), opts, std::nullopt);
    dir.write("derive.json", text);
    out << text;
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Interference of phase-randomized chirped laser pulses: g2, HOM dips, jitter tolerance",
                 "pulsehom"};
    app.require_subcommand(1);

    CommonOptions common;
    ScanOptions scan_opts;
    HomOptions hom_opts;
    AnalyzeOptions analyze_opts;
    DeriveOptions derive_opts;

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo g2 and V_HOM for a scenario");
    add_common(simulate, common);
    simulate->add_option("--samples", common.samples, "samples per repeat");
    simulate->add_option("--repeats", common.repeats, "independent repeats");

    auto* scan = app.add_subcommand("scan", "g2 as a function of systematic delay (CSV)");
    add_common(scan, common);
    scan->add_option("--samples", common.samples, "samples per repeat");
    scan->add_option("--repeats", common.repeats, "independent repeats");
    scan->add_option("--delay-range", scan_opts.delay_range, "min:max in ps");
    scan->add_option("--delay-step", scan_opts.delay_step, "step in ps");

    auto* hom = app.add_subcommand("hom", "photon-counting HOM histogram and visibility");
    add_common(hom, common);
    hom->add_option("--samples", common.samples, "number of clock periods (pulses)");
    hom->add_option("--gate-ps", hom_opts.gate_ps, "coincidence gate window in ps");
    hom->add_flag("--timetags", hom_opts.timetags, "export click time tags to the output directory");

    auto* analyze = app.add_subcommand("analyze", "g2 and V_HOM of a recorded intensity trace");
    add_common(analyze, common, false);
    analyze->add_option("trace", analyze_opts.trace, "trace file")->required();
    analyze->add_option("--format", analyze_opts.format, "auto | values | time_intensity");
    analyze->add_flag("--quantize-8bit", analyze_opts.quantize, "re-quantize to 8 bits");

    auto* derive = app.add_subcommand("derive", "pulse parameters from measured width and bandwidth");
    add_common(derive, common, false);
    derive->add_option("--width-fwhm", derive_opts.width_fwhm, "intensity FWHM in ps")->required();
    derive->add_option("--bandwidth", derive_opts.bandwidth, "spectral FWHM in GHz");
    derive->add_option("--bandwidth-fw10-nm", derive_opts.bandwidth_fw10_nm,
                       "spectral full width at 1/10 maximum in nm");
    derive->add_option("--wavelength-nm", derive_opts.wavelength_nm, "center wavelength");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*simulate) return cmd_simulate(common, args, out);
        if (*scan) return cmd_scan(common, scan_opts, args, out);
        if (*hom) return cmd_hom(common, hom_opts, args, out);
        if (*analyze) return cmd_analyze(common, analyze_opts, args, out);
        if (*derive) return cmd_derive(common, derive_opts, args, out);
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
    return kConfigError;
}

}  // namespace pulsehom::cli
