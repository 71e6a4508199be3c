#include "pulsehom/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "pulsehom/errors.hpp"

namespace pulsehom {

namespace {

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, Entry, std::less<>>;

const std::map<std::string, std::set<std::string, std::less<>>, std::less<>>& schema() {
    static const std::map<std::string, std::set<std::string, std::less<>>, std::less<>> s = {
        {"scenario",
         {"name", "delay_ps", "samples", "repeats", "seed", "jitter_mode", "orthogonal_modes",
          "fixed_phase_rad"}},
        {"pulse",
         {"width_fwhm_ps", "tau_p_ps", "bandwidth_fwhm_ghz", "bandwidth_fw10_nm", "beta_per_ps2",
          "wavelength_nm", "nu0_ghz", "intensity"}},
        {"source_a", {"jitter_fwhm_ps", "phase_random"}},
        {"source_b", {"jitter_fwhm_ps", "phase_random"}},
        {"filter", {"shape", "fwhm_ghz"}},
        {"detectors", {"efficiency", "jitter_fwhm_ps", "dark_rate_hz", "dead_time_ps"}},
        {"counting",
         {"mu_port", "clock_period_ps", "pulses", "splitter_ratio", "gate_ps", "bin_width_ps"}},
        {"scan", {"delay_min_ps", "delay_max_ps", "delay_step_ps"}},
    };
    return s;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class Document {
public:
    explicit Document(std::string_view text) {
        std::string current;
        int line_no = 0;
        std::istringstream in{std::string(text)};
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_no;
            std::string_view line = raw;
            if (const auto hash = line.find('#'); hash != std::string_view::npos)
                line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("malformed section header", line_no);
                current = std::string(trim(line.substr(1, line.size() - 2)));
                if (!schema().contains(current))
                    throw ConfigError("unknown section [" + current + "]", line_no);
                if (seen_sections_.contains(current))
                    throw ConfigError("duplicate section [" + current + "]", line_no);
                seen_sections_.insert(current);
                sections_[current];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ConfigError("expected key = value", line_no);
            if (current.empty()) throw ConfigError("key outside of any section", line_no);
            const std::string key(trim(line.substr(0, eq)));
            const std::string value(trim(line.substr(eq + 1)));
            if (!schema().at(current).contains(key))
                throw ConfigError("unknown key '" + key + "' in [" + current + "]", line_no);
            if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
            auto& section = sections_[current];
            if (section.contains(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
            section[key] = Entry{value, line_no};
        }
    }

    bool has_section(std::string_view name) const { return sections_.contains(std::string(name)); }

    const Entry* find(std::string_view section, std::string_view key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        const auto e = s->second.find(key);
        return e == s->second.end() ? nullptr : &e->second;
    }

    double number(std::string_view section, std::string_view key, double fallback) const {
        const Entry* e = find(section, key);
        return e ? parse_number(*e, key) : fallback;
    }

    std::optional<double> optional_number(std::string_view section, std::string_view key) const {
        const Entry* e = find(section, key);
        if (!e) return std::nullopt;
        return parse_number(*e, key);
    }

    std::uint64_t count(std::string_view section, std::string_view key, std::uint64_t fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        const double v = parse_number(*e, key);
        if (v < 0.0 || v != std::floor(v) || v > 1.8e19)
            throw ConfigError("'" + std::string(key) + "' must be a non-negative integer", e->line);
        return static_cast<std::uint64_t>(v);
    }

    bool flag(std::string_view section, std::string_view key, bool fallback) const {
        const Entry* e = find(section, key);
        if (!e) return fallback;
        if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
        if (e->value == "false" || e->value == "no" || e->value == "0") return false;
        throw ConfigError("'" + std::string(key) + "' must be true or false", e->line);
    }

    std::string text(std::string_view section, std::string_view key, std::string fallback) const {
        const Entry* e = find(section, key);
        return e ? e->value : fallback;
    }

    int line_of(std::string_view section, std::string_view key) const {
        const Entry* e = find(section, key);
        return e ? e->line : 0;
    }

private:
    static double parse_number(const Entry& e, std::string_view key) {
        double v = 0.0;
        std::string_view s = e.value;
        if (!s.empty() && s.front() == '+') s.remove_prefix(1);
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
            throw ConfigError("'" + std::string(key) + "' is not a number: " + e.value, e.line);
        return v;
    }

    std::map<std::string, Section, std::less<>> sections_;
    std::set<std::string> seen_sections_;
};

// Wraps InputError from the domain constructors with the config line.
template <typename Fn>
auto at_line(int line, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        throw ConfigError(e.what(), line);
    }
}

PulseShape build_pulse(const Document& doc, std::vector<std::string>& decisions) {
    if (!doc.has_section("pulse")) throw ConfigError("missing [pulse] section");
    const Entry* width = doc.find("pulse", "width_fwhm_ps");
    const Entry* tau = doc.find("pulse", "tau_p_ps");
    if ((width != nullptr) == (tau != nullptr))
        throw ConfigError("[pulse] needs exactly one of width_fwhm_ps or tau_p_ps");
    const int width_line = width ? width->line : tau->line;
    const double tau_p = at_line(width_line, [&] {
        const double t = width ? fwhm_to_sigma(doc.number("pulse", "width_fwhm_ps", 0.0))
                               : doc.number("pulse", "tau_p_ps", 0.0);
        if (!(t > 0.0)) throw InputError("pulse width must be positive");
        return t;
    });

    const Entry* wl = doc.find("pulse", "wavelength_nm");
    const Entry* nu = doc.find("pulse", "nu0_ghz");
    if (wl && nu) throw ConfigError("[pulse] takes wavelength_nm or nu0_ghz, not both", nu->line);
    const double wavelength = doc.number("pulse", "wavelength_nm", 1550.0);
    if (!(wavelength > 0.0)) throw ConfigError("wavelength must be positive", doc.line_of("pulse", "wavelength_nm"));
    const double nu0 = nu ? doc.number("pulse", "nu0_ghz", 0.0) : kSpeedOfLightNmGhz / wavelength;

    const char* chirp_keys[] = {"bandwidth_fwhm_ghz", "bandwidth_fw10_nm", "beta_per_ps2"};
    int given = 0;
    for (const char* k : chirp_keys) given += doc.find("pulse", k) != nullptr;
    if (given > 1)
        throw ConfigError("[pulse] takes one of bandwidth_fwhm_ghz, bandwidth_fw10_nm, beta_per_ps2");

    double beta = 0.0;
    if (doc.find("pulse", "beta_per_ps2")) {
        beta = doc.number("pulse", "beta_per_ps2", 0.0);
    } else if (const Entry* e = doc.find("pulse", "bandwidth_fwhm_ghz")) {
        beta = at_line(e->line, [&] {
            return chirp_from_bandwidth(doc.number("pulse", "bandwidth_fwhm_ghz", 0.0), tau_p);
        });
        decisions.emplace_back(
            "chirp_from_bandwidth: beta = sqrt((bw/bw_tl)^2 - 1) / (4 tau_p^2), bandwidths as "
            "intensity FWHM in linear frequency");
    } else if (const Entry* e = doc.find("pulse", "bandwidth_fw10_nm")) {
        beta = at_line(e->line, [&] {
            const double fw10 = wavelength_width_to_ghz(doc.number("pulse", "bandwidth_fw10_nm", 0.0),
                                                        kSpeedOfLightNmGhz / nu0);
            return chirp_from_bandwidth(fw10_to_fwhm(fw10), tau_p);
        });
        decisions.emplace_back(
            "spectral_width_conversion: full width at 1/10 max converted to FWHM with the Gaussian "
            "ratio sqrt(ln 10 / ln 2) = 1.823");
        decisions.emplace_back(
            "chirp_from_bandwidth: beta = sqrt((bw/bw_tl)^2 - 1) / (4 tau_p^2), bandwidths as "
            "intensity FWHM in linear frequency");
    }
    const double intensity = doc.number("pulse", "intensity", 1.0);
    return at_line(doc.line_of("pulse", "intensity"), [&] { return PulseShape(tau_p, beta, nu0, intensity); });
}

SourceSpec build_source(const Document& doc, std::string_view section, const PulseShape& pulse) {
    SourceSpec s{pulse, doc.number(section, "jitter_fwhm_ps", 0.0), doc.flag(section, "phase_random", true)};
    at_line(doc.line_of(section, "jitter_fwhm_ps"), [&] {
        validate(s);
        return 0;
    });
    return s;
}

}  // namespace

LoadedConfig parse_config(std::string_view text, std::string_view default_name) {
    const Document doc(text);
    LoadedConfig cfg;
    cfg.name = doc.text("scenario", "name", std::string(default_name));

    cfg.source_pulse = build_pulse(doc, cfg.decisions);
    PulseShape pulse = cfg.source_pulse;
    if (doc.has_section("filter")) {
        FilterSpec f;
        f.shape = at_line(doc.line_of("filter", "shape"),
                          [&] { return parse_filter_shape(doc.text("filter", "shape", "flat_top")); });
        if (!doc.find("filter", "fwhm_ghz")) throw ConfigError("[filter] needs fwhm_ghz");
        f.fwhm_bandwidth = doc.number("filter", "fwhm_ghz", 0.0);
        pulse = at_line(doc.line_of("filter", "fwhm_ghz"), [&] { return apply_spectral_filter(pulse, f); });
        cfg.filter = f;
        cfg.decisions.emplace_back(fmt::format(
            "spectral_filter: {} {} GHz applied at zero detuning; the filtered tau_p and beta are "
            "model-derived (flat_top: tau_p from the intensity FWHM, beta from an intensity-weighted "
            "fit of the instantaneous frequency)",
            to_string(f.shape), f.fwhm_bandwidth));
    }

    ScenarioConfig& sc = cfg.scenario();
    sc.source_a = build_source(doc, "source_a", pulse);
    sc.source_b = build_source(doc, "source_b", pulse);
    sc.systematic_delay = doc.number("scenario", "delay_ps", 0.0);
    sc.n_samples = doc.count("scenario", "samples", 1'000'000);
    sc.n_repeats = doc.count("scenario", "repeats", 100);
    sc.rng_seed = doc.count("scenario", "seed", 1);
    sc.orthogonal_modes = doc.flag("scenario", "orthogonal_modes", false);
    sc.fixed_phase = doc.number("scenario", "fixed_phase_rad", 0.0);
    const std::string mode = doc.text("scenario", "jitter_mode", "per_source");
    if (mode == "per_source") {
        sc.jitter_mode = JitterMode::per_source;
        cfg.decisions.emplace_back(
            "jitter_composition=per_source: dt = delay + j_a - j_b with independent Gaussian "
            "emission jitters, sigma = FWHM / 2.3548");
    } else if (mode == "combined") {
        sc.jitter_mode = JitterMode::combined;
        cfg.decisions.emplace_back(
            "jitter_composition=combined: source_a jitter FWHM applied directly to dt, sigma = "
            "FWHM / 2.3548");
    } else {
        throw ConfigError("jitter_mode must be per_source or combined",
                          doc.line_of("scenario", "jitter_mode"));
    }
    cfg.decisions.emplace_back(
        "carrier_phase: omega*dt folded into the uniformly random relative phase");
    at_line(doc.line_of("scenario", "samples"), [&] {
        validate(sc);
        return 0;
    });

    CountingConfig& cc = cfg.counting;
    DetectorSpec det;
    det.efficiency = doc.number("detectors", "efficiency", det.efficiency);
    det.timing_jitter_fwhm = doc.number("detectors", "jitter_fwhm_ps", det.timing_jitter_fwhm);
    det.dark_rate = doc.number("detectors", "dark_rate_hz", det.dark_rate);
    det.dead_time = doc.number("detectors", "dead_time_ps", det.dead_time);
    at_line(doc.line_of("detectors", "efficiency"), [&] {
        validate(det);
        return 0;
    });
    cc.detectors = {det, det};
    cc.mu_port = doc.number("counting", "mu_port", cc.mu_port);
    cc.clock_period = doc.number("counting", "clock_period_ps", cc.clock_period);
    cc.pulses = doc.count("counting", "pulses", cc.pulses);
    cc.splitter_ratio = doc.number("counting", "splitter_ratio", cc.splitter_ratio);
    cc.bin_width = doc.number("counting", "bin_width_ps", cc.bin_width);
    cc.gate_window = doc.optional_number("counting", "gate_ps");
    if (doc.has_section("counting") || doc.has_section("detectors")) {
        at_line(doc.line_of("counting", "mu_port"), [&] {
            validate(cc);
            return 0;
        });
    }

    cfg.scan.delay_min = doc.number("scan", "delay_min_ps", cfg.scan.delay_min);
    cfg.scan.delay_max = doc.number("scan", "delay_max_ps", cfg.scan.delay_max);
    cfg.scan.delay_step = doc.number("scan", "delay_step_ps", cfg.scan.delay_step);
    at_line(doc.line_of("scan", "delay_step_ps"), [&] {
        return delay_grid(cfg.scan.delay_min, cfg.scan.delay_max, cfg.scan.delay_step).size();
    });
    return cfg;
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.stem().string());
}

}  // namespace pulsehom
