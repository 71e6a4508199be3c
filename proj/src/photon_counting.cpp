#include "pulsehom/photon_counting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>

#include "pulsehom/errors.hpp"
#include "pulsehom/parallel.hpp"

namespace pulsehom {

namespace {

struct SlotClicks {
    std::vector<std::int64_t> c;
    std::vector<std::int64_t> d;
};

// Poisson draw by inversion; only used with means far below 1.
int poisson_small(double mean, double u) {
    double p = std::exp(-mean);
    double cdf = p;
    int k = 0;
    while (u > cdf && k < 64) {
        ++k;
        p *= mean / k;
        cdf += p;
    }
    return k;
}

void apply_dead_time(std::vector<std::int64_t>& clicks, double dead_time) {
    if (!(dead_time > 0.0) || clicks.empty()) return;
    std::size_t kept = 1;
    for (std::size_t i = 1; i < clicks.size(); ++i) {
        if (static_cast<double>(clicks[i] - clicks[kept - 1]) >= dead_time) clicks[kept++] = clicks[i];
    }
    clicks.resize(kept);
}

std::vector<std::int64_t> gated(const std::vector<std::int64_t>& clicks, double clock_period,
                                double gate) {
    std::vector<std::int64_t> out;
    out.reserve(clicks.size());
    for (std::int64_t t : clicks) {
        const double x = static_cast<double>(t);
        const double center = std::round(x / clock_period) * clock_period;
        if (std::abs(x - center) <= 0.5 * gate) out.push_back(t);
    }
    return out;
}

}  // namespace

void validate(const DetectorSpec& detector) {
    if (!(detector.efficiency >= 0.0 && detector.efficiency <= 1.0))
        throw InputError("detector efficiency must lie in [0, 1]");
    if (!(detector.timing_jitter_fwhm >= 0.0)) throw InputError("detector jitter must be >= 0");
    if (!(detector.dark_rate >= 0.0)) throw InputError("dark count rate must be >= 0");
    if (!(detector.dead_time >= 0.0)) throw InputError("dead time must be >= 0");
}

double click_probability(const DetectorSpec& detector, double mu_port, double intensity) {
    return -std::expm1(-detector.efficiency * mu_port * intensity);
}

void validate(const CountingConfig& config) {
    validate(config.scenario);
    for (const DetectorSpec& det : config.detectors) validate(det);
    if (!(config.mu_port >= 0.0) || !std::isfinite(config.mu_port))
        throw InputError("mu_port must be finite and non-negative");
    if (!(config.clock_period > 0.0)) throw InputError("clock period must be positive");
    if (config.pulses == 0) throw InputError("pulse count must be positive");
    if (!(config.splitter_ratio > 0.0 && config.splitter_ratio < 1.0))
        throw InputError("splitter ratio must lie in (0, 1)");
    if (!(config.bin_width > 0.0)) throw InputError("histogram bin width must be positive");
    if (config.gate_window && !(*config.gate_window > 0.0))
        throw InputError("gate window must be positive");
    for (const DetectorSpec& det : config.detectors) {
        // Port intensities never exceed twice the mean.
        const double p = click_probability(det, config.mu_port, 2.0);
        if (p >= kMaxClickProbability)
            throw InputError("mu_port " + std::to_string(config.mu_port) +
                             " breaks the small-signal condition: peak click probability " +
                             std::to_string(p) + " >= " + std::to_string(kMaxClickProbability));
    }
}

ClickStreams simulate_clicks(const CountingConfig& config, unsigned threads) {
    validate(config);
    const ScenarioConfig& scenario = config.scenario;
    const PulseShape& pulse = shared_pulse(scenario);
    const double period = config.clock_period;
    const double pulse_sigma = pulse.tau_p();
    const DetectorSpec& det_c = config.detectors[0];
    const DetectorSpec& det_d = config.detectors[1];
    const double jitter_c = det_c.timing_jitter_fwhm / kFwhmPerSigma;
    const double jitter_d = det_d.timing_jitter_fwhm / kFwhmPerSigma;
    const double dark_mean_c = det_c.dark_rate * 1e-12 * period;
    const double dark_mean_d = det_d.dark_rate * 1e-12 * period;
    const bool dark = dark_mean_c > 0.0 || dark_mean_d > 0.0;
    // Port intensity never exceeds 2 i0, and the click probability rises with intensity.
    const double p_max_c = click_probability(det_c, config.mu_port, 2.0);
    const double p_max_d = click_probability(det_d, config.mu_port, 2.0);

    const std::uint64_t chunks = (config.pulses + kChunkSize - 1) / kChunkSize;
    std::vector<SlotClicks> per_chunk(chunks);

    for_each_chunk(chunks, threads, [&](std::size_t chunk) {
        SlotClicks& out = per_chunk[chunk];
        const std::uint64_t first = chunk * kChunkSize;
        const std::uint64_t last = std::min<std::uint64_t>(first + kChunkSize, config.pulses);
        for (std::uint64_t k = first; k < last; ++k) {
            SampleStream stream = event_stream(scenario, 0, k);
            const std::uint32_t w0 = stream.next_u32();
            const std::uint32_t w1 = stream.next_u32();
            const std::uint32_t w2 = stream.next_u32();
            const double u_c = stream.uniform();
            const double u_d = stream.uniform();
            const double slot = static_cast<double>(k) * period;
            // Most slots cannot click even at peak intensity; skip the event for those.
            if (u_c < p_max_c || u_d < p_max_d) {
                const EventSample event = event_from_words(w0, w1, w2, scenario);
                const PortPair ports = scenario.orthogonal_modes
                                           ? non_interfering_outputs(pulse)
                                           : split_outputs(event, pulse, config.splitter_ratio);
                const bool click_c =
                    u_c < click_probability(det_c, config.mu_port, ports.i_c / pulse.i0());
                const bool click_d =
                    u_d < click_probability(det_d, config.mu_port, ports.i_d / pulse.i0());
                if (click_c || click_d) {
                    SampleStream timing(scenario.rng_seed, 0, StreamDomain::click_timing, k);
                    const auto [emit_c, emit_d] = box_muller(timing.next_u32(), timing.next_u32());
                    const auto [det_jit_c, det_jit_d] =
                        box_muller(timing.next_u32(), timing.next_u32());
                    if (click_c)
                        out.c.push_back(std::llround(slot + pulse_sigma * emit_c + jitter_c * det_jit_c));
                    if (click_d)
                        out.d.push_back(std::llround(slot + pulse_sigma * emit_d + jitter_d * det_jit_d));
                }
            }
            if (dark) {
                SampleStream noise(scenario.rng_seed, 0, StreamDomain::dark_counts, k);
                const int n_c = poisson_small(dark_mean_c, noise.uniform());
                const int n_d = poisson_small(dark_mean_d, noise.uniform());
                for (int i = 0; i < n_c; ++i)
                    out.c.push_back(std::llround(slot + (noise.uniform() - 0.5) * period));
                for (int i = 0; i < n_d; ++i)
                    out.d.push_back(std::llround(slot + (noise.uniform() - 0.5) * period));
            }
        }
    });

    ClickStreams streams;
    streams.clock_period = period;
    streams.total_pulses = config.pulses;
    std::size_t nc = 0;
    std::size_t nd = 0;
    for (const SlotClicks& s : per_chunk) {
        nc += s.c.size();
        nd += s.d.size();
    }
    streams.c.reserve(nc);
    streams.d.reserve(nd);
    for (SlotClicks& s : per_chunk) {
        streams.c.insert(streams.c.end(), s.c.begin(), s.c.end());
        streams.d.insert(streams.d.end(), s.d.begin(), s.d.end());
        s = SlotClicks{};
    }
    std::sort(streams.c.begin(), streams.c.end());
    std::sort(streams.d.begin(), streams.d.end());
    apply_dead_time(streams.c, det_c.dead_time);
    apply_dead_time(streams.d, det_d.dead_time);
    return streams;
}

CoincidenceHistogram build_histogram(const ClickStreams& streams, double bin_width,
                                     std::optional<double> gate_window) {
    if (!(bin_width > 0.0)) throw InputError("histogram bin width must be positive");
    if (gate_window && !(*gate_window > 0.0)) throw InputError("gate window must be positive");
    if (!std::is_sorted(streams.c.begin(), streams.c.end()) ||
        !std::is_sorted(streams.d.begin(), streams.d.end()))
        throw InputError("click streams must be sorted by timestamp");

    CoincidenceHistogram hist;
    hist.bin_width = bin_width;
    hist.total_pulses = streams.total_pulses;
    hist.gate_window = gate_window;
    for (int m = -kHistogramHalfRange; m <= kHistogramHalfRange; ++m) hist.counts[m] = 0;

    std::vector<std::int64_t> c_gated;
    std::vector<std::int64_t> d_gated;
    const std::vector<std::int64_t>* c = &streams.c;
    const std::vector<std::int64_t>* d = &streams.d;
    if (gate_window) {
        c_gated = gated(streams.c, streams.clock_period, *gate_window);
        d_gated = gated(streams.d, streams.clock_period, *gate_window);
        c = &c_gated;
        d = &d_gated;
    }

    std::array<std::uint64_t, 2 * kHistogramHalfRange + 1> bins{};
    const double reach = (kHistogramHalfRange + 0.5) * bin_width;
    std::size_t lo = 0;
    for (std::int64_t tc : *c) {
        const double t = static_cast<double>(tc);
        while (lo < d->size() && static_cast<double>((*d)[lo]) < t - reach) ++lo;
        for (std::size_t j = lo; j < d->size(); ++j) {
            const double delta = t - static_cast<double>((*d)[j]);
            if (delta < -reach) break;
            const auto m = static_cast<int>(std::floor(delta / bin_width + 0.5));
            if (m >= -kHistogramHalfRange && m <= kHistogramHalfRange)
                ++bins[static_cast<std::size_t>(m + kHistogramHalfRange)];
        }
    }
    for (int m = -kHistogramHalfRange; m <= kHistogramHalfRange; ++m)
        hist.counts[m] = bins[static_cast<std::size_t>(m + kHistogramHalfRange)];
    return hist;
}

CoincidenceHistogram merge(const CoincidenceHistogram& a, const CoincidenceHistogram& b) {
    if (a.bin_width != b.bin_width || a.gate_window != b.gate_window)
        throw InputError("histograms with different binning or gating cannot be merged");
    CoincidenceHistogram out = a;
    out.total_pulses += b.total_pulses;
    for (const auto& [bin, n] : b.counts) out.counts[bin] += n;
    return out;
}

HistogramVisibility vhom_from_histogram(const CoincidenceHistogram& hist) {
    auto count = [&](int m) {
        const auto it = hist.counts.find(m);
        return it == hist.counts.end() ? std::uint64_t{0} : it->second;
    };
    std::uint64_t side = 0;
    int populated = 0;
    for (int m = 1; m <= 5; ++m) {
        side += count(m) + count(-m);
        populated += (count(m) > 0) + (count(-m) > 0);
    }
    if (side == 0) throw NumericalError("no coincidences in the side bins: cannot normalize the dip");
    if (populated < 10)
        throw NumericalError("only " + std::to_string(populated) +
                             " of the 10 side bins hold coincidences; acquire more pulses");

    HistogramVisibility out;
    out.zero_bin = count(0);
    out.side_mean = static_cast<double>(side) / 10.0;
    const double c0 = static_cast<double>(out.zero_bin);
    const double ratio = c0 / out.side_mean;
    out.v = 1.0 - ratio;
    // var(C0) = C0, var(side mean) = side / 100.
    out.shot_noise_error =
        std::sqrt(c0 / (out.side_mean * out.side_mean) + ratio * ratio / static_cast<double>(side));
    return out;
}

Chi2Result side_bin_flatness(const CoincidenceHistogram& hist) {
    std::vector<double> side;
    for (const auto& [bin, n] : hist.counts)
        if (bin != 0) side.push_back(static_cast<double>(n));
    Chi2Result out;
    out.dof = static_cast<int>(side.size()) - 1;
    if (out.dof < 1) return out;
    double mean = 0.0;
    for (double n : side) mean += n;
    mean /= static_cast<double>(side.size());
    if (!(mean > 0.0)) return out;
    for (double n : side) out.chi2 += (n - mean) * (n - mean) / mean;
    const boost::math::chi_squared dist(out.dof);
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.chi2));
    return out;
}

}  // namespace pulsehom
