#pragma once

// Single-photon-regime HOM measurement: attenuated pulses on two threshold
// detectors, time-tagged clicks and a coincidence histogram.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "pulsehom/monte_carlo.hpp"

namespace pulsehom {

struct DetectorSpec {
    double efficiency = 0.05;
    // Calibrated so that two 45 ps pulses give a ~112 ps coincidence peak:
    // sqrt(2 (45^2 + 65^2)) = 111.8 ps.
    double timing_jitter_fwhm = 65.0;  // ps
    double dark_rate = 0.0;            // Hz
    double dead_time = 0.0;            // ps
};

void validate(const DetectorSpec& detector);

struct CountingConfig {
    ScenarioConfig scenario;
    double mu_port = 0.02;  // mean photon number per output port per pulse
    double clock_period = 1000.0;  // ps
    std::uint64_t pulses = 100'000'000;
    double splitter_ratio = 0.507;
    std::array<DetectorSpec, 2> detectors{};
    std::optional<double> gate_window;  // ps
    double bin_width = 1000.0;          // ps
};

// Largest click probability per pulse that still counts as small-signal.
inline constexpr double kMaxClickProbability = 0.1;

void validate(const CountingConfig& config);

// Click probability per pulse at port intensity i (mean 1).
double click_probability(const DetectorSpec& detector, double mu_port, double intensity);

struct ClickStreams {
    std::vector<std::int64_t> c;  // sorted timestamps, integer ps
    std::vector<std::int64_t> d;
    double clock_period = 1000.0;
    std::uint64_t total_pulses = 0;
};

ClickStreams simulate_clicks(const CountingConfig& config, unsigned threads = 1);

inline constexpr int kHistogramHalfRange = 15;

struct CoincidenceHistogram {
    double bin_width = 1000.0;
    std::map<int, std::uint64_t> counts;  // bins -15..15, all present
    std::uint64_t total_pulses = 0;
    std::optional<double> gate_window;
};

// Histogram of t_c - t_d over +-15 bins. With a gate, a pair counts only
// when both clicks lie within +-gate/2 of their slot centers. Throws
// InputError if a stream is not sorted.
CoincidenceHistogram build_histogram(const ClickStreams& streams, double bin_width,
                                     std::optional<double> gate_window);

// Bin-wise sum of two histograms with identical binning.
CoincidenceHistogram merge(const CoincidenceHistogram& a, const CoincidenceHistogram& b);

struct HistogramVisibility {
    double v = 0.0;
    double shot_noise_error = 0.0;
    std::uint64_t zero_bin = 0;
    double side_mean = 0.0;
};

// v = 1 - C0 / mean(C-5..C-1, C1..C5) with Poisson error propagation.
// Throws NumericalError unless all ten side bins are populated.
HistogramVisibility vhom_from_histogram(const CoincidenceHistogram& hist);

struct Chi2Result {
    double chi2 = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

// Flatness of the side bins |m| >= 1 against their common mean.
Chi2Result side_bin_flatness(const CoincidenceHistogram& hist);

}  // namespace pulsehom
