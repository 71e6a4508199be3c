#include "pulsehom/pulse_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <fftw3.h>

#include "pulsehom/errors.hpp"

namespace pulsehom {

namespace {

using std::numbers::pi;

constexpr double kGhzPerThz = 1000.0;

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

// FFTW planning is not thread-safe; executing a plan is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(fftw_complex* p) const noexcept { fftw_free(p); }
};
using FftwArray = std::unique_ptr<fftw_complex[], FftwFree>;

FftwArray fftw_array(std::size_t n) {
    auto* p = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (p == nullptr) throw std::bad_alloc();
    return FftwArray(p);
}

class FftwPlan {
public:
    FftwPlan(int n, fftw_complex* in, fftw_complex* out, int sign) {
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_1d(n, in, out, sign, FFTW_ESTIMATE);
        if (plan_ == nullptr) throw NumericalError("FFTW could not create a plan");
    }
    ~FftwPlan() {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
    }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;

    void execute() const { fftw_execute(plan_); }

private:
    fftw_plan plan_ = nullptr;
};

std::complex<double> load(const fftw_complex& c) { return {c[0], c[1]}; }
void store(fftw_complex& c, std::complex<double> v) {
    c[0] = v.real();
    c[1] = v.imag();
}

// Intensity transmission FWHM -> amplitude transmission at frequency nu (GHz).
double amplitude_transmission(const FilterSpec& filter, double nu) {
    switch (filter.shape) {
        case FilterShape::flat_top:
            return std::abs(nu) <= 0.5 * filter.fwhm_bandwidth ? 1.0 : 0.0;
        case FilterShape::gaussian:
            return std::exp(-2.0 * std::numbers::ln2 * nu * nu /
                            (filter.fwhm_bandwidth * filter.fwhm_bandwidth));
    }
    return 0.0;
}

void check_filter(const FilterSpec& filter) {
    if (!(filter.fwhm_bandwidth > 0.0)) throw InputError("filter bandwidth must be positive");
    if (filter.center_frequency != 0.0)
        throw InputError("detuned filters are not supported (center_frequency must be 0)");
}

}  // namespace

double fwhm_to_sigma(double fwhm) {
    if (!(fwhm >= 0.0)) throw InputError("FWHM must be non-negative");
    return fwhm / kFwhmPerSigma;
}

double sigma_to_fwhm(double sigma) {
    if (!(sigma >= 0.0)) throw InputError("sigma must be non-negative");
    return sigma * kFwhmPerSigma;
}

double fw10_to_fwhm(double full_width_tenth) {
    if (!(full_width_tenth >= 0.0)) throw InputError("spectral width must be non-negative");
    return full_width_tenth / std::sqrt(std::log(10.0) / std::numbers::ln2);
}

double wavelength_width_to_ghz(double width_nm, double center_nm) {
    if (!(width_nm >= 0.0) || !finite_positive(center_nm))
        throw InputError("wavelength width must be >= 0 and center wavelength > 0");
    return kSpeedOfLightNmGhz * width_nm / (center_nm * center_nm);
}

PulseShape::PulseShape(double tau_p, double beta, double nu0, double i0)
    : tau_p_(tau_p), beta_(beta), nu0_(nu0), i0_(i0) {
    if (!finite_positive(tau_p)) throw InputError("tau_p must be positive");
    if (!finite_positive(i0)) throw InputError("pulse intensity i0 must be positive");
    if (!std::isfinite(beta)) throw InputError("chirp coefficient must be finite");
    if (!std::isfinite(nu0)) throw InputError("carrier frequency must be finite");
}

PulseShape PulseShape::from_fwhm(double width_fwhm, double beta, double nu0, double i0) {
    return PulseShape(fwhm_to_sigma(width_fwhm), beta, nu0, i0);
}

PulseShape PulseShape::from_gamma(std::complex<double> gamma, double nu0, double i0) {
    if (!(gamma.real() > 0.0)) throw NumericalError("field envelope does not decay");
    return PulseShape(0.5 / std::sqrt(gamma.real()), -gamma.imag(), nu0, i0);
}

std::complex<double> PulseShape::gamma() const noexcept {
    return {0.25 / (tau_p_ * tau_p_), -beta_};
}

double PulseShape::duration_fwhm() const noexcept { return tau_p_ * kFwhmPerSigma; }

double PulseShape::transform_limited_bandwidth() const noexcept {
    return kGaussianTimeBandwidth / duration_fwhm() * kGhzPerThz;
}

double PulseShape::bandwidth_fwhm() const noexcept {
    return transform_limited_bandwidth() * std::sqrt(chirp_broadening());
}

double PulseShape::chirp_broadening() const noexcept {
    const double t2 = tau_p_ * tau_p_;
    return 1.0 + 16.0 * beta_ * beta_ * t2 * t2;
}

double PulseShape::overlap_decay_rate() const noexcept {
    return chirp_broadening() / (8.0 * tau_p_ * tau_p_);
}

double PulseShape::intensity(double t) const noexcept {
    return i0_ / (tau_p_ * std::sqrt(2.0 * pi)) * std::exp(-t * t / (2.0 * tau_p_ * tau_p_));
}

void validate(const SourceSpec& source) {
    if (!(source.jitter_fwhm >= 0.0) || !std::isfinite(source.jitter_fwhm))
        throw InputError("source jitter FWHM must be finite and non-negative");
}

FilterShape parse_filter_shape(std::string_view name) {
    if (name == "gaussian") return FilterShape::gaussian;
    if (name == "flat_top" || name == "flat-top") return FilterShape::flat_top;
    throw InputError("unknown filter shape '" + std::string(name) + "'");
}

std::string_view to_string(FilterShape shape) {
    return shape == FilterShape::gaussian ? "gaussian" : "flat_top";
}

double chirp_from_bandwidth(double measured_fwhm_bandwidth, double tau_p) {
    if (!finite_positive(tau_p)) throw InputError("tau_p must be positive");
    if (!finite_positive(measured_fwhm_bandwidth))
        throw InputError("measured bandwidth must be positive");
    const double tl = kGaussianTimeBandwidth / (tau_p * kFwhmPerSigma) * kGhzPerThz;
    const double ratio = measured_fwhm_bandwidth / tl;
    if (ratio < 1.0) {
        if (1.0 - ratio <= 1e-12) return 0.0;
        throw InputError("measured bandwidth " + std::to_string(measured_fwhm_bandwidth) +
                         " GHz is below the transform limit " + std::to_string(tl) +
                         " GHz for tau_p = " + std::to_string(tau_p) +
                         " ps: inconsistent measurement inputs");
    }
    return std::sqrt(ratio * ratio - 1.0) / (4.0 * tau_p * tau_p);
}

double bandwidth_from_chirp(double beta, double tau_p) {
    return PulseShape(tau_p, beta).bandwidth_fwhm();
}

PulseShape apply_gaussian_filter_closed_form(const PulseShape& pulse, double fwhm_bandwidth) {
    check_filter({FilterShape::gaussian, fwhm_bandwidth, 0.0});
    if (std::isinf(fwhm_bandwidth)) return pulse;
    const double b_thz = fwhm_bandwidth / kGhzPerThz;
    // Amplitude transmission exp(-c omega^2), omega in rad/ps.
    const double c = std::numbers::ln2 / (2.0 * pi * pi * b_thz * b_thz);
    const std::complex<double> inv_gamma = 1.0 / pulse.gamma();
    const std::complex<double> out_inv_gamma = inv_gamma + 4.0 * c;
    const double power_in = 0.5 * inv_gamma.real();
    const double power_out = power_in + 2.0 * c;
    const double i0 = pulse.i0() * std::sqrt(power_in / power_out);
    return PulseShape::from_gamma(1.0 / out_inv_gamma, pulse.nu0(), i0);
}

PulseShape apply_spectral_filter_fft(const PulseShape& pulse, const FilterSpec& filter) {
    check_filter(filter);
    if (std::isinf(filter.fwhm_bandwidth)) return pulse;

    const double tau = pulse.tau_p();
    const double pulse_bw_thz = pulse.bandwidth_fwhm() / kGhzPerThz;
    const double filter_bw_thz = filter.fwhm_bandwidth / kGhzPerThz;
    const double dt_max = std::min(tau / 16.0, 1.0 / (16.0 * pulse_bw_thz));
    // Fine frequency bins keep the rectangular edges sharp.
    const double span_min = std::max(64.0 * tau, 1024.0 / filter_bw_thz);

    constexpr std::size_t kMinPoints = 1024;
    constexpr std::size_t kMaxPoints = std::size_t{1} << 22;
    const auto wanted = static_cast<std::size_t>(std::ceil(span_min / dt_max));
    const std::size_t n = std::max(kMinPoints, std::bit_ceil(wanted));
    if (n > kMaxPoints)
        throw NumericalError("FFT grid needs " + std::to_string(n) +
                             " points to resolve the pulse and filter; limit is " +
                             std::to_string(kMaxPoints));
    const double dt = dt_max;
    const double span = dt * static_cast<double>(n);
    if (span < 8.0 * pulse.duration_fwhm() || dt > tau / 8.0)
        throw NumericalError("FFT grid too coarse to resolve the pulse");

    const int ni = static_cast<int>(n);
    const auto half = static_cast<std::ptrdiff_t>(n / 2);
    auto field = fftw_array(n);
    auto spectrum = fftw_array(n);
    auto derivative = fftw_array(n);
    FftwPlan forward(ni, field.get(), spectrum.get(), FFTW_FORWARD);
    FftwPlan backward(ni, spectrum.get(), field.get(), FFTW_BACKWARD);
    FftwPlan backward_derivative(ni, derivative.get(), derivative.get(), FFTW_BACKWARD);

    const std::complex<double> gamma = pulse.gamma();
    auto time_at = [&](std::size_t j) {
        return static_cast<double>(static_cast<std::ptrdiff_t>(j) - half) * dt;
    };
    for (std::size_t j = 0; j < n; ++j) {
        const double t = time_at(j);
        store(field[j], std::exp(-gamma * t * t));
    }
    forward.execute();

    double power_in = 0.0;
    double power_out = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto signed_k = k < n / 2 ? static_cast<double>(k)
                                        : static_cast<double>(k) - static_cast<double>(n);
        const double nu_thz = signed_k / span;
        const std::complex<double> s = load(spectrum[k]);
        const std::complex<double> filtered =
            s * amplitude_transmission(filter, nu_thz * kGhzPerThz);
        power_in += std::norm(s);
        power_out += std::norm(filtered);
        store(spectrum[k], filtered);
        const double omega = k == n / 2 ? 0.0 : 2.0 * pi * nu_thz;
        store(derivative[k], filtered * std::complex<double>(0.0, omega));
    }
    if (!(power_out > 0.0)) throw NumericalError("filter removed the whole pulse spectrum");
    backward.execute();
    backward_derivative.execute();

    std::vector<double> intensity(n);
    std::size_t peak = 0;
    for (std::size_t j = 0; j < n; ++j) {
        intensity[j] = std::norm(load(field[j]));
        if (intensity[j] > intensity[peak]) peak = j;
    }
    const double half_max = 0.5 * intensity[peak];

    std::size_t left = peak;
    while (left > 0 && intensity[left - 1] >= half_max) --left;
    std::size_t right = peak;
    while (right + 1 < n && intensity[right + 1] >= half_max) ++right;
    if (left == 0 || right + 1 == n) throw NumericalError("filtered pulse exceeds the FFT window");

    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double frac =
            (intensity[inside] - half_max) / (intensity[inside] - intensity[outside]);
        return time_at(inside) + frac * (time_at(outside) - time_at(inside));
    };
    const double fwhm = crossing(right, right + 1) - crossing(left, left - 1);
    if (fwhm < 4.0 * dt) throw NumericalError("FFT grid too coarse to resolve the filtered pulse");

    // Weighted least squares of the instantaneous frequency d(phase)/dt = 2 beta t.
    double numer = 0.0;
    double denom = 0.0;
    for (std::size_t j = left; j <= right; ++j) {
        const double t = time_at(j);
        const std::complex<double> a = load(field[j]);
        const std::complex<double> da = load(derivative[j]);
        numer += t * (std::conj(a) * da).imag();
        denom += t * t * intensity[j];
    }
    const double beta = denom > 0.0 ? numer / (2.0 * denom) : 0.0;
    const double i0 = pulse.i0() * power_out / power_in;
    return PulseShape(fwhm / kFwhmPerSigma, beta, pulse.nu0(), i0);
}

PulseShape apply_spectral_filter(const PulseShape& pulse, const FilterSpec& filter) {
    check_filter(filter);
    if (filter.shape == FilterShape::gaussian)
        return apply_gaussian_filter_closed_form(pulse, filter.fwhm_bandwidth);
    return apply_spectral_filter_fft(pulse, filter);
}

}  // namespace pulsehom
