#include "pulsehom/interference.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pulsehom/errors.hpp"

namespace pulsehom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Ports hi = i0 (1 + |x|) and lo = 2 i0 - hi. The subtraction is exact
// (Sterbenz), so hi + lo reproduces 2 i0 bit for bit.
PortPair ports_from_overlap(double i0, double overlap) {
    const double hi = i0 * (1.0 + std::abs(overlap));
    const double lo = 2.0 * i0 - hi;
    return overlap >= 0.0 ? PortPair{hi, lo} : PortPair{lo, hi};
}

}  // namespace

double modulation_factor(double dt, const PulseShape& pulse) {
    return std::exp(-pulse.overlap_decay_rate() * dt * dt);
}

PortPair single_shot_outputs(const EventSample& event, const PulseShape& pulse) {
    return ports_from_overlap(pulse.i0(), std::cos(event.dphi0) * modulation_factor(event.dt, pulse));
}

PortPair split_outputs(const EventSample& event, const PulseShape& pulse, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw InputError("splitter ratio must lie in (0, 1)");
    const double coupling = 2.0 * std::sqrt(ratio * (1.0 - ratio));
    return ports_from_overlap(pulse.i0(), coupling * std::cos(event.dphi0) *
                                              modulation_factor(event.dt, pulse));
}

PortPair non_interfering_outputs(const PulseShape& pulse) { return {pulse.i0(), pulse.i0()}; }

double carrier_angular_frequency(const PulseShape& pulse) {
    return kTwoPi * pulse.nu0() * 1e-3;
}

double total_phase(const EventSample& event, const PulseShape& pulse) {
    const double phase = std::fmod(carrier_angular_frequency(pulse) * event.dt + event.dphi0, kTwoPi);
    return phase < 0.0 ? phase + kTwoPi : phase;
}

double instantaneous_intensity(double t, const EventSample& event, const PulseShape& pulse,
                               Port port) {
    const double early = pulse.intensity(t - 0.5 * event.dt);
    const double late = pulse.intensity(t + 0.5 * event.dt);
    const double f = early + late;
    const double g = std::sqrt(early * late);
    const double phase = carrier_angular_frequency(pulse) * event.dt +
                         2.0 * pulse.beta() * t * event.dt + event.dphi0;
    const double cross = 2.0 * g * std::cos(phase);
    return 0.5 * (port == Port::c ? f + cross : f - cross);
}

WindowIntegrals integrate_window(const EventSample& event, const PulseShape& pulse,
                                 double window, double rel_tol) {
    const double min_window = 10.0 * pulse.duration_fwhm();
    if (!(window >= min_window))
        throw InputError("detector window " + std::to_string(window) +
                         " ps is shorter than 10 pulse FWHMs (" + std::to_string(min_window) +
                         " ps)");

    const double a = -0.5 * window;
    const double chirp_rate = 2.0 * pulse.beta() * event.dt;
    auto terms = [&](double t, double weight, WindowIntegrals& acc) {
        const double early = pulse.intensity(t - 0.5 * event.dt);
        const double late = pulse.intensity(t + 0.5 * event.dt);
        const double g = std::sqrt(early * late);
        acc.energy += weight * (early + late);
        acc.cos_term += weight * g * std::cos(chirp_rate * t);
        acc.sin_term += weight * g * std::sin(chirp_rate * t);
    };

    // Composite trapezoid on n intervals; each refinement only adds midpoints.
    auto intervals = static_cast<long long>(std::ceil(window / (pulse.tau_p() / 50.0)));
    double h = window / static_cast<double>(intervals);
    WindowIntegrals sums;
    terms(a, 0.5, sums);
    terms(-a, 0.5, sums);
    for (long long j = 1; j < intervals; ++j) terms(a + static_cast<double>(j) * h, 1.0, sums);

    auto scaled = [&](const WindowIntegrals& s) {
        return WindowIntegrals{s.energy * h, s.cos_term * h, s.sin_term * h, 0};
    };
    WindowIntegrals estimate = scaled(sums);

    constexpr int kMaxRefinements = 8;
    for (int level = 1; level <= kMaxRefinements; ++level) {
        for (long long j = 0; j < intervals; ++j)
            terms(a + (static_cast<double>(j) + 0.5) * h, 1.0, sums);
        intervals *= 2;
        h *= 0.5;
        WindowIntegrals next = scaled(sums);
        next.refinements = level;
        const double scale = std::abs(next.energy);
        const bool converged = std::abs(next.energy - estimate.energy) <= rel_tol * scale &&
                               std::abs(next.cos_term - estimate.cos_term) <= rel_tol * scale &&
                               std::abs(next.sin_term - estimate.sin_term) <= rel_tol * scale;
        estimate = next;
        if (converged) return estimate;
    }
    throw NumericalError("window quadrature did not converge after " +
                         std::to_string(kMaxRefinements) + " refinements");
}

PortPair detector_averaged_intensity(const EventSample& event, const PulseShape& pulse,
                                     double window) {
    const WindowIntegrals w = integrate_window(event, pulse, window);
    const double phase = carrier_angular_frequency(pulse) * event.dt + event.dphi0;
    // Integral of (f + 2 g cos(phase + 2 beta t dt)) / 2 at port c; the
    // sin(2 beta t dt) part is kept for completeness though it integrates to ~0.
    const double cross = std::cos(phase) * w.cos_term - std::sin(phase) * w.sin_term;
    const double half_energy = 0.5 * w.energy;
    const double hi = half_energy + std::abs(cross);
    const double lo = w.energy - hi;
    return cross >= 0.0 ? PortPair{hi, lo} : PortPair{lo, hi};
}

PortPair detector_averaged_intensity(const EventSample& event, const PulseShape& pulse) {
    return detector_averaged_intensity(event, pulse, kDefaultWindowFwhms * pulse.duration_fwhm());
}

double analytic_g2(double systematic_delay, double combined_jitter_sigma,
                   const PulseShape& pulse) {
    if (!(combined_jitter_sigma >= 0.0)) throw InputError("jitter sigma must be non-negative");
    const double kappa = pulse.overlap_decay_rate();
    const double spread = 1.0 + 4.0 * kappa * combined_jitter_sigma * combined_jitter_sigma;
    const double mu = systematic_delay;
    return 1.0 + 0.5 * std::exp(-2.0 * kappa * mu * mu / spread) / std::sqrt(spread);
}

}  // namespace pulsehom
