#pragma once

// Monte-Carlo estimation of g2 / V_HOM for two independent pulsed sources.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pulsehom/analysis_io.hpp"
#include "pulsehom/interference.hpp"
#include "pulsehom/pulse_model.hpp"
#include "pulsehom/rng.hpp"

namespace pulsehom {

// How source jitters combine into the arrival-time offset dt.
enum class JitterMode {
    per_source,  // dt = delay + j_a - j_b, each j_x ~ N(0, (jitter_fwhm_x / 2.3548)^2)
    combined,    // dt = delay + j, j ~ N(0, (source_a.jitter_fwhm / 2.3548)^2); source_b ignored
};

struct ScenarioConfig {
    SourceSpec source_a;
    SourceSpec source_b;
    double systematic_delay = 0.0;  // ps
    std::size_t n_samples = 1'000'000;
    std::size_t n_repeats = 100;
    std::uint64_t rng_seed = 1;
    JitterMode jitter_mode = JitterMode::per_source;
    bool orthogonal_modes = false;  // sources in orthogonal modes never interfere
    double fixed_phase = 0.0;       // relative phase when neither source is phase-randomized
};

inline constexpr std::size_t kMinSamples = 1000;
inline constexpr std::size_t kChunkSize = std::size_t{1} << 16;

void validate(const ScenarioConfig& config);

const PulseShape& shared_pulse(const ScenarioConfig& config);

// Standard deviation of dt around the systematic delay, ps.
double delay_sigma(const ScenarioConfig& config);

// Draws a phase (one word) and two jitters (two words) from the stream.
EventSample sample_event(SampleStream& stream, const ScenarioConfig& config);
// Same event from three raw words already drawn from the stream.
EventSample event_from_words(std::uint32_t phase_word, std::uint32_t w1, std::uint32_t w2,
                             const ScenarioConfig& config);

// The stream owned by one interference sample.
SampleStream event_stream(const ScenarioConfig& config, std::size_t repeat, std::uint64_t index);

// Port-c intensity for one drawn event.
double port_c_intensity(const EventSample& event, const ScenarioConfig& config);

struct RunResult {
    double g2 = 0.0;         // mean over repeats
    double vhom = 0.0;
    double std_error = 0.0;  // standard error of the mean g2
    double spread = 0.0;     // sample standard deviation of per-repeat g2
    std::vector<double> repeat_g2;
};

RunResult run(const ScenarioConfig& config, unsigned threads = 1);

struct ScanResult {
    std::vector<double> delays;
    std::vector<double> g2_values;
    std::vector<double> vhom_values;
    std::vector<double> std_errors;
};

// Delays delay_min, delay_min + step, ... up to delay_max inclusive.
std::vector<double> delay_grid(double delay_min, double delay_max, double step);

ScanResult scan_delay(const ScenarioConfig& config, double delay_min, double delay_max,
                      double step, unsigned threads = 1);

// Full width of the g2 - 1 curve at half its peak, by linear interpolation.
// Throws NumericalError if the curve does not fall below half on both sides.
double scan_fwhm(const ScanResult& scan);

// Largest |systematic delay| for which analytic V_HOM stays >= v_target.
double jitter_tolerance(const PulseShape& pulse_after_filter, double combined_sigma,
                        double v_target);

// i_c samples of one repeat, one per 1 ns clock period.
IntensityTrace generate_trace(const ScenarioConfig& config, std::size_t length,
                              std::size_t repeat = 0, unsigned threads = 1);

}  // namespace pulsehom
