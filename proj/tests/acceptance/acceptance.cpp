// One [PASS]/[FAIL] line per acceptance criterion; exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "commands.hpp"
#include "oracles.hpp"
#include "pulsehom/analysis_io.hpp"
#include "pulsehom/config.hpp"
#include "pulsehom/interference.hpp"
#include "pulsehom/monte_carlo.hpp"
#include "pulsehom/photon_counting.hpp"

namespace fs = std::filesystem;
using namespace pulsehom;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

fs::path bundled(const char* name) { return fs::path(PULSEHOM_CONFIG_DIR) / name; }

ScenarioConfig reference_scenario(const PulseShape& pulse) {
    ScenarioConfig c;
    c.source_a = {pulse, 3.6, true};
    c.source_b = {pulse, 3.8, true};
    c.n_samples = 1'000'000;
    c.n_repeats = 100;
    c.rng_seed = 1;
    return c;
}

Verdict visibility_near(const PulseShape& pulse, double target) {
    const RunResult r = run(reference_scenario(pulse));
    return {std::abs(r.vhom - target) <= 0.003,
            fmt::format("V_HOM = {:.4f} +/- {:.4f}, target {} +/- 0.003", r.vhom, r.std_error, target)};
}

Verdict oracle_equivalence() {
    int mc_fail = 0;
    int points = 0;
    double worst_z = 0.0;
    double worst_quad = 0.0;
    for (double beta : {0.0, 3.5e-4, 5.0e-3}) {
        const PulseShape p(beta == 3.5e-4 ? 19.1 : 12.74, beta);
        for (double sigma : {0.0, 2.2, 7.0}) {
            for (double mu : {0.0, 10.0}) {
                ScenarioConfig c = reference_scenario(p);
                c.source_a.jitter_fwhm = sigma * kFwhmPerSigma;
                c.source_b.jitter_fwhm = 0.0;
                c.systematic_delay = mu;
                c.n_samples = 100000;
                c.n_repeats = 20;
                c.rng_seed = 11;
                const RunResult r = run(c);
                const double expected = analytic_g2(mu, sigma, p);
                const double z = std::abs(r.g2 - expected) / r.std_error;
                worst_z = std::max(worst_z, z);
                mc_fail += z > 4.0;
                ++points;
            }
            for (double mu : {0.0, 10.0, 25.0})
                worst_quad = std::max(worst_quad, std::abs(analytic_g2(mu, sigma, p) -
                                                           oracles::brute_force_g2(mu, sigma, p)));
        }
    }
    return {mc_fail == 0 && worst_quad < 1e-4,
            fmt::format("{} configs, worst |MC - analytic| = {:.2f} SE; worst |analytic - quadrature| = {:.1e}",
                        points, worst_z, worst_quad)};
}

Verdict window_consistency() {
    double worst = 0.0;
    bool exact = true;
    for (const PulseShape& p : {PulseShape(19.1, 3.5e-4), PulseShape(12.74, 5.0e-3)}) {
        for (double dt : {0.0, 5.0, 10.0, 20.0, 40.0}) {
            for (double phi : {0.0, oracles::pi / 4, oracles::pi / 2, oracles::pi}) {
                const PortPair closed = single_shot_outputs({phi, dt}, p);
                const PortPair numeric = detector_averaged_intensity(oracles::with_total_phase(phi, dt, p), p);
                for (auto [n, c] : {std::pair{numeric.i_c, closed.i_c}, std::pair{numeric.i_d, closed.i_d}}) {
                    // Relative where the port is lit, absolute at a dark port.
                    worst = std::max(worst, std::abs(n - c) / std::max(c, 1e-6));
                }
                exact = exact && closed.i_c + closed.i_d == 2.0 * p.i0();
                const double window = 20.0 * p.duration_fwhm();
                const EventSample e{phi, dt};
                exact = exact && detector_averaged_intensity(e, p, window).i_c +
                                         detector_averaged_intensity(e, p, window).i_d ==
                                     integrate_window(e, p, window).energy;
            }
        }
    }
    return {worst <= 1e-6 && exact,
            fmt::format("worst relative deviation {:.1e}, port sums {}", worst, exact ? "exact" : "NOT exact")};
}

Verdict delay_scan() {
    ScenarioConfig filtered = reference_scenario(PulseShape(19.1, 3.5e-4));
    filtered.n_samples = 100000;
    filtered.n_repeats = 10;
    const ScanResult s = scan_delay(filtered, -200, 200, 10);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < s.delays.size(); ++i)
        if (s.g2_values[i] > s.g2_values[peak]) peak = i;
    const double far_dev = std::max(std::abs(s.g2_values.front() - 1.0), std::abs(s.g2_values.back() - 1.0));
    const bool filtered_ok = s.delays[peak] == 0.0 && std::abs(s.g2_values[peak] - 1.50) <= 0.005 && far_dev <= 0.005;

    // Unfiltered pulses with the spectral width measured under injection.
    const LoadedConfig scope = load_config(bundled("seeded_scope.cfg"));
    const RunResult r = run(scope.scenario());
    const bool unfiltered_ok = std::abs(r.g2 - 1.49) <= 0.01;
    return {filtered_ok && unfiltered_ok,
            fmt::format("filtered peak {:.4f} at {} ps, |g2 - 1| at +/-200 ps <= {:.4f}; "
                        "unfiltered seeded peak {:.4f}",
                        s.g2_values[peak], s.delays[peak], far_dev, r.g2)};
}

Verdict unseeded_peak() {
    const LoadedConfig cfg = load_config(bundled("unseeded.cfg"));
    const RunResult r = run(cfg.scenario());
    return {r.g2 >= 1.20 && r.g2 <= 1.40, fmt::format("peak g2 {:.4f}, band [1.20, 1.40]", r.g2)};
}

Verdict photon_counting_bridge() {
    LoadedConfig cfg = load_config(bundled("filtered.cfg"));
    CountingConfig cc = cfg.counting;
    const RunResult macro = run(cc.scenario);

    cc.pulses = 100'000'000;
    const HistogramVisibility ungated =
        vhom_from_histogram(build_histogram(simulate_clicks(cc), cc.bin_width, std::nullopt));
    const double combined = std::hypot(ungated.shot_noise_error, macro.std_error);
    const bool bridge = std::abs(ungated.v - macro.vhom) <= 3.0 * combined;

    // The gated band is narrower than the shot noise of 1e8 pulses, so the
    // gated comparison runs ten times longer.
    cc.pulses = 1'000'000'000;
    const ClickStreams long_run = simulate_clicks(cc);
    const HistogramVisibility long_ungated =
        vhom_from_histogram(build_histogram(long_run, cc.bin_width, std::nullopt));
    const HistogramVisibility gated = vhom_from_histogram(build_histogram(long_run, cc.bin_width, cc.gate_window));
    const bool band = gated.v >= 0.49 && gated.v <= 0.505;
    const bool ordered = gated.v >= long_ungated.v - std::hypot(gated.shot_noise_error, long_ungated.shot_noise_error);
    return {bridge && band && ordered,
            fmt::format("1e8 pulses: ungated {:.4f} vs macroscopic {:.4f} (3 sigma = {:.4f}); "
                        "1e9 pulses: gated {:.4f} +/- {:.4f}, ungated {:.4f}",
                        ungated.v, macro.vhom, 3.0 * combined, gated.v, gated.shot_noise_error,
                        long_ungated.v)};
}

Verdict jitter_tolerances() {
    auto tolerance = [](const char* name) {
        const LoadedConfig cfg = load_config(bundled(name));
        return jitter_tolerance(cfg.scenario().source_a.pulse, delay_sigma(cfg.scenario()), 0.45);
    };
    const double t10 = tolerance("filter_10ghz.cfg");
    const double t20 = tolerance("filter_20ghz.cfg");
    const bool ok = t10 > t20 && t10 >= 25.0 / 2.5 && t10 <= 25.0 * 2.5 && t20 >= 12.0 / 2.5 && t20 <= 12.0 * 2.5;
    return {ok, fmt::format("10 GHz: +/-{:.1f} ps, 20 GHz: +/-{:.1f} ps", t10, t20)};
}

Verdict arcsine_law() {
    ScenarioConfig c = reference_scenario(PulseShape(19.1, 3.5e-4));
    c.source_a.jitter_fwhm = 0.0;
    c.source_b.jitter_fwhm = 0.0;
    const std::size_t n = 100000;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        SampleStream s = event_stream(c, 0, i);
        x[i] = port_c_intensity(sample_event(s, c), c);
    }
    const double d = oracles::arcsine_ks_distance(x);
    const double crit = oracles::ks_critical_1pct(n);
    return {d < crit, fmt::format("KS D = {:.5f}, 1% critical value {:.5f}", d, crit)};
}

// Stdout plus every output file except the timestamped manifest.
std::string cli_fingerprint(std::vector<std::string> args, const fs::path& dir, bool& ok) {
    args.insert(args.end(), {"--out-dir", dir.string()});
    std::ostringstream out;
    std::ostringstream err;
    ok = ok && cli::run(args, out, err) == cli::kOk;
    std::string all = out.str();
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().filename() != "manifest.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
        std::ifstream in(f);
        std::ostringstream s;
        s << in.rdbuf();
        all += "\n@" + f.filename().string() + "\n" + s.str();
    }
    fs::remove_all(dir);
    return all;
}

Verdict determinism() {
    const fs::path root = fs::temp_directory_path() /
                          ("pulsehom_acceptance_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(root);
    {
        ScenarioConfig c = reference_scenario(PulseShape(12.74, 5.0e-3));
        write_trace(root / "trace.csv", generate_trace(c, 20000));
    }
    const std::string filtered = bundled("filtered.cfg").string();
    const std::string trace = (root / "trace.csv").string();
    const std::vector<std::vector<std::string>> commands = {
        {"simulate", "--config", filtered, "--samples", "50000", "--repeats", "4", "--seed", "5"},
        {"scan", "--config", filtered, "--samples", "20000", "--repeats", "3", "--delay-range=-60:60", "--seed", "5"},
        {"hom", "--config", filtered, "--samples", "3000000", "--timetags", "--seed", "5"},
        {"analyze", trace, "--quantize-8bit"},
        {"derive", "--width-fwhm", "45", "--bandwidth", "11"},
    };
    bool ok = true;
    int differing = 0;
    for (const auto& cmd : commands) {
        std::vector<std::string> fingerprints;
        for (const char* threads : {"1", "1", "3"}) {
            auto args = cmd;
            args.insert(args.end(), {"--threads", threads});
            fingerprints.push_back(cli_fingerprint(args, root / "out", ok));
        }
        differing += fingerprints[0] != fingerprints[1] || fingerprints[0] != fingerprints[2];
    }
    fs::remove_all(root);
    return {ok && differing == 0,
            fmt::format("{} commands, repeated and 3-thread outputs {}", commands.size(),
                        differing == 0 ? "bit-identical" : fmt::format("differ for {}", differing))};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"Filtered Monte Carlo V_HOM", [] { return visibility_near(PulseShape(19.1, 3.5e-4), 0.498); }},
        {"Unfiltered Monte Carlo V_HOM", [] { return visibility_near(PulseShape(12.74, 5.0e-3), 0.463); }},
        {"Oracle equivalence", oracle_equivalence},
        {"Detector-window integral vs closed form", window_consistency},
        {"Delay-scan behavior", delay_scan},
        {"Unseeded peak g2", unseeded_peak},
        {"Photon-counting bridge", photon_counting_bridge},
        {"Jitter tolerance at V = 0.45", jitter_tolerances},
        {"Arcsine law of i_c", arcsine_law},
        {"Determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v{false, ""};
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += !v.pass;
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << i + 1 << ". " << criteria[i].first << ": " << v.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
