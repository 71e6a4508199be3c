#include "pulsehom/monte_carlo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pulsehom/errors.hpp"
#include "pulsehom/parallel.hpp"

namespace pulsehom {

namespace {

struct Moments {
    double sum = 0.0;
    double sum_sq = 0.0;
};

std::size_t chunk_count(std::size_t n) { return (n + kChunkSize - 1) / kChunkSize; }

}  // namespace

void validate(const ScenarioConfig& config) {
    validate(config.source_a);
    validate(config.source_b);
    if (!(config.source_a.pulse == config.source_b.pulse))
        throw InputError("both sources must share one pulse shape");
    if (!std::isfinite(config.systematic_delay)) throw InputError("systematic delay must be finite");
    if (config.n_samples < kMinSamples)
        throw InputError("n_samples must be at least " + std::to_string(kMinSamples));
    if (config.n_repeats < 2) throw InputError("n_repeats must be at least 2");
    if (!std::isfinite(config.fixed_phase)) throw InputError("fixed phase must be finite");
}

const PulseShape& shared_pulse(const ScenarioConfig& config) { return config.source_a.pulse; }

double delay_sigma(const ScenarioConfig& config) {
    const double sa = fwhm_to_sigma(config.source_a.jitter_fwhm);
    if (config.jitter_mode == JitterMode::combined) return sa;
    return std::hypot(sa, fwhm_to_sigma(config.source_b.jitter_fwhm));
}

SampleStream event_stream(const ScenarioConfig& config, std::size_t repeat, std::uint64_t index) {
    return SampleStream(config.rng_seed, repeat, StreamDomain::interference_event, index);
}

EventSample sample_event(SampleStream& stream, const ScenarioConfig& config) {
    const std::uint32_t phase_word = stream.next_u32();
    const std::uint32_t w1 = stream.next_u32();
    const std::uint32_t w2 = stream.next_u32();
    return event_from_words(phase_word, w1, w2, config);
}

EventSample event_from_words(std::uint32_t phase_word, std::uint32_t w1, std::uint32_t w2,
                             const ScenarioConfig& config) {
    const auto [za, zb] = box_muller(w1, w2);

    EventSample event;
    const bool random_phase = config.source_a.phase_random || config.source_b.phase_random;
    event.dphi0 = random_phase ? 2.0 * std::numbers::pi * to_half_open_unit(phase_word)
                               : config.fixed_phase;
    const double sa = config.source_a.jitter_fwhm / kFwhmPerSigma;
    if (config.jitter_mode == JitterMode::combined) {
        event.dt = config.systematic_delay + sa * za;
    } else {
        const double sb = config.source_b.jitter_fwhm / kFwhmPerSigma;
        event.dt = config.systematic_delay + sa * za - sb * zb;
    }
    return event;
}

double port_c_intensity(const EventSample& event, const ScenarioConfig& config) {
    const PulseShape& pulse = shared_pulse(config);
    if (config.orthogonal_modes) return non_interfering_outputs(pulse).i_c;
    return single_shot_outputs(event, pulse).i_c;
}

RunResult run(const ScenarioConfig& config, unsigned threads) {
    validate(config);
    const std::size_t chunks = chunk_count(config.n_samples);
    std::vector<Moments> partial(chunks * config.n_repeats);
    // Moments about the mean port intensity i0.
    const double shift = shared_pulse(config).i0();

    for_each_chunk(partial.size(), threads, [&](std::size_t item) {
        const std::size_t repeat = item / chunks;
        const std::size_t first = (item % chunks) * kChunkSize;
        const std::size_t last = std::min(first + kChunkSize, config.n_samples);
        Moments m;
        for (std::size_t i = first; i < last; ++i) {
            SampleStream stream = event_stream(config, repeat, i);
            const double x = port_c_intensity(sample_event(stream, config), config) - shift;
            m.sum += x;
            m.sum_sq += x * x;
        }
        partial[item] = m;
    });

    RunResult out;
    out.repeat_g2.reserve(config.n_repeats);
    for (std::size_t r = 0; r < config.n_repeats; ++r) {
        Moments total;
        for (std::size_t c = 0; c < chunks; ++c) {
            total.sum += partial[r * chunks + c].sum;
            total.sum_sq += partial[r * chunks + c].sum_sq;
        }
        out.repeat_g2.push_back(
            g2_from_shifted_sums(shift, total.sum, total.sum_sq,
                                 static_cast<double>(config.n_samples)));
    }
    const auto reps = static_cast<double>(config.n_repeats);
    double mean = 0.0;
    for (double g : out.repeat_g2) mean += g;
    mean /= reps;
    double var = 0.0;
    for (double g : out.repeat_g2) var += (g - mean) * (g - mean);
    var /= reps - 1.0;

    out.g2 = mean;
    out.vhom = vhom_from_g2(mean);
    out.spread = std::sqrt(var);
    out.std_error = out.spread / std::sqrt(reps);
    return out;
}

std::vector<double> delay_grid(double delay_min, double delay_max, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw InputError("delay step must be positive");
    if (!(delay_max >= delay_min)) throw InputError("delay range is empty");
    const auto n = static_cast<std::size_t>(std::floor((delay_max - delay_min) / step + 1e-9)) + 1;
    std::vector<double> delays(n);
    for (std::size_t i = 0; i < n; ++i) delays[i] = delay_min + static_cast<double>(i) * step;
    return delays;
}

ScanResult scan_delay(const ScenarioConfig& config, double delay_min, double delay_max,
                      double step, unsigned threads) {
    ScanResult scan;
    scan.delays = delay_grid(delay_min, delay_max, step);
    for (double delay : scan.delays) {
        ScenarioConfig point = config;
        point.systematic_delay = delay;
        const RunResult r = run(point, threads);
        scan.g2_values.push_back(r.g2);
        scan.vhom_values.push_back(r.vhom);
        scan.std_errors.push_back(r.std_error);
    }
    return scan;
}

double scan_fwhm(const ScanResult& scan) {
    const auto& g = scan.g2_values;
    if (g.size() < 3) throw NumericalError("scan too short to measure a width");
    std::size_t peak = 0;
    for (std::size_t i = 1; i < g.size(); ++i)
        if (g[i] > g[peak]) peak = i;
    const double half = 0.5 * (g[peak] - 1.0);
    auto cross = [&](std::size_t inside, std::size_t outside) {
        const double a = g[inside] - 1.0;
        const double b = g[outside] - 1.0;
        return scan.delays[inside] + (a - half) / (a - b) * (scan.delays[outside] - scan.delays[inside]);
    };
    std::size_t left = peak;
    while (left > 0 && g[left - 1] - 1.0 >= half) --left;
    std::size_t right = peak;
    while (right + 1 < g.size() && g[right + 1] - 1.0 >= half) ++right;
    if (left == 0 || right + 1 == g.size())
        throw NumericalError("scan range does not cover the half-maximum points");
    return cross(right, right + 1) - cross(left, left - 1);
}

double jitter_tolerance(const PulseShape& pulse_after_filter, double combined_sigma,
                        double v_target) {
    if (!(v_target > 0.0 && v_target < 0.5)) throw InputError("target visibility must lie in (0, 0.5)");
    auto visibility = [&](double mu) {
        return analytic_g2(mu, combined_sigma, pulse_after_filter) - 1.0;
    };
    if (visibility(0.0) < v_target)
        throw InputError("target visibility " + std::to_string(v_target) +
                         " is unreachable even at zero delay (V = " +
                         std::to_string(visibility(0.0)) + ")");
    double lo = 0.0;
    double hi = pulse_after_filter.duration_fwhm();
    while (visibility(hi) >= v_target) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (visibility(mid) >= v_target ? lo : hi) = mid;
    }
    return lo;
}

IntensityTrace generate_trace(const ScenarioConfig& config, std::size_t length, std::size_t repeat,
                              unsigned threads) {
    validate(config);
    IntensityTrace trace;
    trace.samples.resize(length);
    trace.sample_period = 1000.0;
    trace.metadata = "simulated port-c interference outcomes";
    for_each_chunk(chunk_count(length), threads, [&](std::size_t chunk) {
        const std::size_t first = chunk * kChunkSize;
        const std::size_t last = std::min(first + kChunkSize, length);
        for (std::size_t i = first; i < last; ++i) {
            SampleStream stream = event_stream(config, repeat, i);
            trace.samples[i] = port_c_intensity(sample_event(stream, config), config);
        }
    });
    return trace;
}

}  // namespace pulsehom
