#pragma once

// Beam-splitter interference of two identical chirped Gaussian pulses.
//
// The closed form is the detector-averaged output of a lossless splitter,
//     i_c = i0 (1 + cos(dphi0) M(dt)),   i_d = i0 (1 - cos(dphi0) M(dt)),
//     M(dt) = exp(-kappa dt^2),  kappa = (1 + 16 beta^2 tau_p^4) / (8 tau_p^2).
// The carrier term omega*dt is folded into dphi0, which is therefore the
// total relative phase. The instantaneous-field routines keep omega explicit
// and serve as the numerical reference for the closed form.

#include "pulsehom/pulse_model.hpp"

namespace pulsehom {

struct EventSample {
    double dphi0 = 0.0;  // relative phase theta_b - theta_a, rad
    double dt = 0.0;     // arrival-time offset at the splitter, ps
};

struct PortPair {
    double i_c = 0.0;
    double i_d = 0.0;
};

enum class Port { c, d };

// Visibility factor M(dt) in [0, 1].
double modulation_factor(double dt, const PulseShape& pulse);

PortPair single_shot_outputs(const EventSample& event, const PulseShape& pulse);

// Lossless splitter with amplitude transmission sqrt(ratio) and reflection
// sqrt(1 - ratio); ratio = 0.5 reproduces single_shot_outputs.
// The two ports always sum to exactly 2 i0.
PortPair split_outputs(const EventSample& event, const PulseShape& pulse, double ratio);

// Same, with the overlap term forced off (orthogonal modes).
PortPair non_interfering_outputs(const PulseShape& pulse);

// Carrier angular frequency 2 pi nu0, rad/ps.
double carrier_angular_frequency(const PulseShape& pulse);

// The total phase omega*dt + dphi0 reduced to [0, 2 pi), i.e. the phase the
// closed form sees for an instantaneous-field event.
double total_phase(const EventSample& event, const PulseShape& pulse);

double instantaneous_intensity(double t, const EventSample& event, const PulseShape& pulse,
                               Port port);

// Integrals of the instantaneous terms over [-T/2, T/2].
struct WindowIntegrals {
    double energy = 0.0;     // integral of f = I(t - dt/2) + I(t + dt/2)
    double cos_term = 0.0;   // integral of g cos(2 beta t dt)
    double sin_term = 0.0;   // integral of g sin(2 beta t dt), zero by symmetry
    int refinements = 0;
};

// Adaptive trapezoid: starts from a step of tau_p/50 and halves until
// successive estimates agree to rel_tol. Throws NumericalError on
// non-convergence, InputError when the window is shorter than 10 pulse FWHMs.
WindowIntegrals integrate_window(const EventSample& event, const PulseShape& pulse,
                                 double window, double rel_tol = 1e-13);

inline constexpr double kDefaultWindowFwhms = 20.0;

PortPair detector_averaged_intensity(const EventSample& event, const PulseShape& pulse,
                                     double window);
PortPair detector_averaged_intensity(const EventSample& event, const PulseShape& pulse);

// Expected g2 for uniform dphi0 and dt ~ Normal(systematic_delay, sigma^2):
//     g2 = 1 + exp(-2 kappa mu^2 / (1 + 4 kappa sigma^2)) / (2 sqrt(1 + 4 kappa sigma^2)).
double analytic_g2(double systematic_delay, double combined_jitter_sigma,
                   const PulseShape& pulse);

}  // namespace pulsehom
