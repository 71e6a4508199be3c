#pragma once

// Chirped Gaussian pulses and the sources that emit them.
//
// Times are in ps and frequencies in GHz, so beta carries ps^-2.
// The field envelope of a pulse is
//     E(t) = sqrt(I(t)) exp(i(omega t + beta t^2)),
//     I(t) = i0 / (tau_p sqrt(2 pi)) exp(-t^2 / (2 tau_p^2)),
// so tau_p is the r.m.s. width of the intensity profile.

#include <complex>
#include <numbers>
#include <string_view>

namespace pulsehom {

// 2 sqrt(2 ln 2): ratio between a Gaussian's FWHM and its r.m.s. width.
inline constexpr double kFwhmPerSigma = 2.3548200450309493;

// Transform-limited time-bandwidth product of a Gaussian, 2 ln 2 / pi.
inline constexpr double kGaussianTimeBandwidth = 2.0 * std::numbers::ln2 / std::numbers::pi;

inline constexpr double kSpeedOfLightNmGhz = 2.99792458e8;  // nm * GHz

// Carrier frequency at 1550 nm.
inline constexpr double kTelecomCarrierGhz = kSpeedOfLightNmGhz / 1550.0;

double fwhm_to_sigma(double fwhm);
double sigma_to_fwhm(double sigma);

// Full width at 1/10 maximum to FWHM for a Gaussian line: divide by
// sqrt(ln 10 / ln 2).
double fw10_to_fwhm(double full_width_tenth);

// Spectral width in wavelength (nm) around center_nm to linear frequency (GHz).
double wavelength_width_to_ghz(double width_nm, double center_nm);

class PulseShape {
public:
    // Throws InputError unless tau_p > 0 and i0 > 0.
    PulseShape(double tau_p, double beta, double nu0 = kTelecomCarrierGhz, double i0 = 1.0);

    static PulseShape from_fwhm(double width_fwhm, double beta, double nu0 = kTelecomCarrierGhz,
                                double i0 = 1.0);

    // Complex Gaussian parameter of the field envelope exp(-gamma t^2),
    // gamma = 1/(4 tau_p^2) - i beta. The inverse requires Re(gamma) > 0.
    static PulseShape from_gamma(std::complex<double> gamma, double nu0, double i0);

    double tau_p() const noexcept { return tau_p_; }
    double beta() const noexcept { return beta_; }
    double nu0() const noexcept { return nu0_; }
    double i0() const noexcept { return i0_; }

    std::complex<double> gamma() const noexcept;

    // Intensity FWHM in ps.
    double duration_fwhm() const noexcept;

    // Intensity-spectrum FWHM (GHz) of the transform-limited pulse with
    // the same duration, and of this chirped pulse.
    double transform_limited_bandwidth() const noexcept;
    double bandwidth_fwhm() const noexcept;

    // 1 + 16 beta^2 tau_p^4: squared spectral broadening due to chirp.
    double chirp_broadening() const noexcept;

    // Decay rate of the two-pulse overlap, exp(-kappa dt^2), in ps^-2.
    double overlap_decay_rate() const noexcept;

    // Intensity profile I(t).
    double intensity(double t) const noexcept;

    friend bool operator==(const PulseShape&, const PulseShape&) = default;

private:
    double tau_p_;  // ps
    double beta_;   // ps^-2
    double nu0_;    // GHz
    double i0_;
};

struct SourceSpec {
    PulseShape pulse{1.0, 0.0};
    double jitter_fwhm = 0.0;  // emission-time jitter, ps
    bool phase_random = true;
};

void validate(const SourceSpec& source);

enum class FilterShape { gaussian, flat_top };

FilterShape parse_filter_shape(std::string_view name);
std::string_view to_string(FilterShape shape);

struct FilterSpec {
    FilterShape shape = FilterShape::flat_top;
    double fwhm_bandwidth = 0.0;    // intensity transmission FWHM, GHz
    double center_frequency = 0.0;  // offset from the pulse carrier, GHz; must be 0
};

// beta from the measured intensity-spectrum FWHM (GHz) and r.m.s. duration
// tau_p (ps). Throws InputError when the bandwidth is below the transform
// limit for that duration.
double chirp_from_bandwidth(double measured_fwhm_bandwidth, double tau_p);

// Inverse relation: bandwidth = transform-limited bandwidth * sqrt(1 + 16 beta^2 tau_p^4).
double bandwidth_from_chirp(double beta, double tau_p);

// Gaussian filters use the closed form; flat-top filters go through the
// FFT path. An infinite bandwidth leaves the pulse unchanged.
PulseShape apply_spectral_filter(const PulseShape& pulse, const FilterSpec& filter);

// Closed-form Gaussian filtering.
PulseShape apply_gaussian_filter_closed_form(const PulseShape& pulse, double fwhm_bandwidth);

// Numerical filtering of the sampled field envelope, for either shape.
// The filtered pulse is mapped back to Gaussian parameters: tau_p from the
// intensity FWHM, beta from an intensity-weighted fit of the instantaneous
// frequency over the half-maximum region.
PulseShape apply_spectral_filter_fft(const PulseShape& pulse, const FilterSpec& filter);

}  // namespace pulsehom
