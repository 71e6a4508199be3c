#pragma once

// Reference computations written independently of the library internals.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pulsehom/interference.hpp"

namespace oracles {

inline constexpr double pi = std::numbers::pi;

// Event whose carrier-inclusive phase omega*dt + dphi0 equals total.
inline pulsehom::EventSample with_total_phase(double total, double dt, const pulsehom::PulseShape& p) {
    const double raw = std::remainder(total - pulsehom::carrier_angular_frequency(p) * dt, 2.0 * pi);
    return {raw < 0.0 ? raw + 2.0 * pi : raw, dt};
}

// E[i_c^2] / E[i_c]^2 by brute force: midpoint rule in
// phase and a dense trapezoid in dt against the normal density.
inline double brute_force_g2(double mu, double sigma, const pulsehom::PulseShape& p) {
    const double kappa = (1.0 + 16.0 * p.beta() * p.beta() * std::pow(p.tau_p(), 4)) /
                         (8.0 * p.tau_p() * p.tau_p());
    auto ic = [&](double phi, double dt) { return 1.0 + std::cos(phi) * std::exp(-kappa * dt * dt); };
    const int n_phi = 256;
    double m1 = 0.0;
    double m2 = 0.0;
    auto accumulate = [&](double dt, double weight) {
        for (int k = 0; k < n_phi; ++k) {
            const double phi = 2.0 * pi * (k + 0.5) / n_phi;
            const double x = ic(phi, dt);
            m1 += weight * x / n_phi;
            m2 += weight * x * x / n_phi;
        }
    };
    if (sigma == 0.0) {
        accumulate(mu, 1.0);
    } else {
        const int n_dt = 4000;
        const double lo = mu - 12.0 * sigma;
        const double h = 24.0 * sigma / n_dt;
        for (int j = 0; j <= n_dt; ++j) {
            const double dt = lo + j * h;
            const double z = (dt - mu) / sigma;
            const double w = (j == 0 || j == n_dt ? 0.5 : 1.0) * h *
                             std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * pi));
            accumulate(dt, w);
        }
    }
    return m2 / (m1 * m1);
}

// Kolmogorov-Smirnov distance to F(x) = 1 - arccos(x - 1) / pi on [0, 2].
inline double arcsine_ks_distance(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    const double n = double(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = 1.0 - std::acos(std::clamp(x[i] - 1.0, -1.0, 1.0)) / pi;
        d = std::max({d, f - double(i) / n, double(i + 1) / n - f});
    }
    return d;
}

// Asymptotic Kolmogorov critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(double(n)); }

}  // namespace oracles
