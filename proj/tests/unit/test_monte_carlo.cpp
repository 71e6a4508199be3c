#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pulsehom/errors.hpp"
#include "pulsehom/monte_carlo.hpp"
#include "test_support.hpp"

using namespace pulsehom;
using test_support::approx;

namespace {

ScenarioConfig scenario(const PulseShape& p, double jitter_a, double jitter_b, double delay,
                        std::size_t samples, std::size_t repeats, std::uint64_t seed = 1) {
    ScenarioConfig c;
    c.source_a = {p, jitter_a, true};
    c.source_b = {p, jitter_b, true};
    c.systematic_delay = delay;
    c.n_samples = samples;
    c.n_repeats = repeats;
    c.rng_seed = seed;
    return c;
}

PulseShape filtered() { return PulseShape(19.1, 3.5e-4); }
PulseShape unfiltered() { return PulseShape(12.74, 5.0e-3); }

PulseShape flat_top(double bw) {
    return apply_spectral_filter(unfiltered(), FilterSpec{FilterShape::flat_top, bw, 0.0});
}

}  // namespace

TEST_CASE("events without jitter sit at the systematic delay") {
    const ScenarioConfig c = scenario(unfiltered(), 0.0, 0.0, 17.5, 1000, 2);
    for (std::uint64_t i = 0; i < 5000; ++i) {
        SampleStream s = event_stream(c, 0, i);
        const EventSample e = sample_event(s, c);
        CHECK(e.dt == 17.5);
        CHECK(e.dphi0 >= 0.0);
        CHECK(e.dphi0 < 2.0 * std::numbers::pi);
    }
}

TEST_CASE("per-source jitters add in quadrature") {
    const ScenarioConfig c = scenario(unfiltered(), 3.6, 3.8, 4.0, 1000, 2);
    CHECK(delay_sigma(c) == doctest::Approx(2.223).epsilon(1e-3));
    const int n = 1000000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        SampleStream s = event_stream(c, 0, i);
        const double dt = sample_event(s, c).dt;
        sum += dt;
        sum_sq += dt * dt;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    const double sigma = std::hypot(3.6, 3.8) / kFwhmPerSigma;
    CHECK(std::abs(mean - 4.0) < 4.0 * sigma / std::sqrt(double(n)));
    CHECK(std::abs(sd - sigma) < 4.0 * sigma / std::sqrt(2.0 * n));
}

TEST_CASE("combined jitter mode applies source a's jitter to the delay") {
    ScenarioConfig c = scenario(unfiltered(), 3.6, 99.0, 0.0, 1000, 2);
    c.jitter_mode = JitterMode::combined;
    CHECK(delay_sigma(c) == approx(3.6 / kFwhmPerSigma, 1e-15));
    const int n = 200000;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        SampleStream s = event_stream(c, 0, i);
        const double dt = sample_event(s, c).dt;
        sum_sq += dt * dt;
    }
    CHECK(std::sqrt(sum_sq / n) == doctest::Approx(3.6 / kFwhmPerSigma).epsilon(0.01));
}

TEST_CASE("scenario validation") {
    CHECK_THROWS_AS(run(scenario(unfiltered(), 0, 0, 0, 999, 10)), InputError);
    CHECK_THROWS_AS(run(scenario(unfiltered(), 0, 0, 0, 1000, 1)), InputError);
    ScenarioConfig mismatched = scenario(unfiltered(), 0, 0, 0, 1000, 2);
    mismatched.source_b.pulse = filtered();
    CHECK_THROWS_AS(run(mismatched), InputError);
}

TEST_CASE("filtered scenario visibility") {
    const RunResult r = run(scenario(filtered(), 3.6, 3.8, 0.0, 1000000, 100));
    CHECK(std::abs(r.vhom - 0.498) <= 0.002);
    CHECK(r.repeat_g2.size() == 100);
    CHECK(r.std_error == approx(r.spread / 10.0, 1e-12));
}

TEST_CASE("unfiltered scenario visibility") {
    const RunResult r = run(scenario(unfiltered(), 3.6, 3.8, 0.0, 1000000, 100));
    CHECK(std::abs(r.vhom - 0.463) <= 0.002);
}

TEST_CASE("zero jitter and delay give the coherent-state maximum") {
    for (double beta : {0.0, 5e-3, 0.05}) {
        const RunResult r = run(scenario(PulseShape(12.74, beta), 0, 0, 0, 200000, 20));
        CHECK(std::abs(r.vhom - 0.5) <= 0.002);
    }
}

TEST_CASE("Monte Carlo agrees with the analytic expectation") {
    const PulseShape pulses[] = {PulseShape(12.74, 0.0), PulseShape(19.1, 3.5e-4), PulseShape(12.74, 5.0e-3)};
    const double sigmas[] = {0.0, 2.2, 7.0};
    for (const PulseShape& p : pulses) {
        for (double sigma : sigmas) {
            for (double mu : {0.0, 10.0}) {
                // One source carries all the jitter.
                ScenarioConfig c = scenario(p, sigma * kFwhmPerSigma, 0.0, mu, 100000, 20, 11);
                const RunResult r = run(c);
                CAPTURE(p.beta());
                CAPTURE(sigma);
                CAPTURE(mu);
                CHECK(std::abs(r.g2 - analytic_g2(mu, sigma, p)) <= 4.0 * r.std_error);
            }
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    const ScenarioConfig c = scenario(unfiltered(), 3.6, 3.8, 3.0, 300000, 4, 99);
    const RunResult one = run(c, 1);
    for (unsigned threads : {2u, 3u, 8u}) {
        const RunResult many = run(c, threads);
        CHECK(many.g2 == one.g2);
        CHECK(many.repeat_g2 == one.repeat_g2);
        CHECK(many.std_error == one.std_error);
    }
    const ScanResult a = scan_delay(c, -30, 30, 15, 1);
    const ScanResult b = scan_delay(c, -30, 30, 15, 4);
    CHECK(a.g2_values == b.g2_values);
    CHECK(generate_trace(c, 150000, 0, 1).samples == generate_trace(c, 150000, 0, 3).samples);
}

TEST_CASE("seeds and repeats select independent streams") {
    const RunResult a = run(scenario(unfiltered(), 3.6, 3.8, 0, 5000, 3, 1));
    const RunResult b = run(scenario(unfiltered(), 3.6, 3.8, 0, 5000, 3, 2));
    CHECK(a.g2 != b.g2);
    CHECK(a.repeat_g2[0] != a.repeat_g2[1]);
    CHECK(run(scenario(unfiltered(), 3.6, 3.8, 0, 5000, 3, 1)).g2 == a.g2);
}

TEST_CASE("dimensional scaling leaves g2 unchanged") {
    const ScenarioConfig base = scenario(PulseShape(12.74, 5.0e-3), 3.6, 3.8, 4.0, 50000, 4, 5);
    const double g_base = run(base).g2;
    for (double s : {0.5, 2.0, 3.7}) {
        const ScenarioConfig scaled =
            scenario(PulseShape(12.74 * s, 5.0e-3 / (s * s)), 3.6 * s, 3.8 * s, 4.0 * s, 50000, 4, 5);
        CHECK(run(scaled).g2 == approx(g_base, 1e-12));
    }
}

TEST_CASE("delay scan of the filtered scenario") {
    const ScenarioConfig c = scenario(filtered(), 3.6, 3.8, 0.0, 100000, 10);
    const ScanResult scan = scan_delay(c, -200, 200, 10);
    REQUIRE(scan.delays.size() == 41);
    CHECK(scan.g2_values.size() == 41);
    CHECK(scan.vhom_values.size() == 41);
    CHECK(scan.std_errors.size() == 41);
    std::size_t peak = 0;
    for (std::size_t i = 0; i < scan.delays.size(); ++i) {
        if (scan.g2_values[i] > scan.g2_values[peak]) peak = i;
        CHECK(scan.g2_values[i] >= 1.0 - 3.0 * scan.std_errors[i]);
        CHECK(scan.g2_values[i] <= 1.5 + 3.0 * scan.std_errors[i]);
        CHECK(scan.vhom_values[i] == scan.g2_values[i] - 1.0);
    }
    CHECK(scan.delays[peak] == 0.0);
    CHECK(std::abs(scan.g2_values[peak] - 1.50) <= 0.005);
    CHECK(std::abs(scan.g2_values.front() - 1.0) <= 0.005);
    CHECK(std::abs(scan.g2_values.back() - 1.0) <= 0.005);
    for (std::size_t i = 0; i < scan.delays.size() / 2; ++i) {
        const std::size_t j = scan.delays.size() - 1 - i;
        CHECK(std::abs(scan.g2_values[i] - scan.g2_values[j]) <=
              3.0 * std::hypot(scan.std_errors[i], scan.std_errors[j]));
    }
}

TEST_CASE("delay grid and scan errors") {
    CHECK(delay_grid(-10, 10, 5) == std::vector<double>{-10, -5, 0, 5, 10});
    CHECK(delay_grid(0, 1, 0.3).size() == 4);
    CHECK_THROWS_AS(delay_grid(0, 10, 0), InputError);
    CHECK_THROWS_AS(delay_grid(10, 0, 1), InputError);
}

TEST_CASE("narrow filters widen the g2 delay curve") {
    auto width = [](double bw) {
        const ScanResult s = scan_delay(scenario(flat_top(bw), 3.6, 3.8, 0, 20000, 5), -200, 200, 5);
        return scan_fwhm(s);
    };
    const double w10 = width(10.0);
    const double w20 = width(20.0);
    const double w60 = width(60.0);
    CHECK(w10 > w20);
    CHECK(w20 > w60);
}

TEST_CASE("jitter tolerance") {
    const PulseShape p = flat_top(20.0);
    CHECK(jitter_tolerance(p, 0.0, 0.4999999) < jitter_tolerance(p, 0.0, 0.49));
    CHECK(jitter_tolerance(p, 0.0, 0.4999999) < 0.05);
    CHECK(jitter_tolerance(p, 0.0, 0.5 - 1e-15) < 1e-4);
    // At the tolerance the analytic visibility equals the target.
    const double mu = jitter_tolerance(p, 2.2, 0.45);
    CHECK(analytic_g2(mu, 2.2, p) - 1.0 == doctest::Approx(0.45).epsilon(1e-9));

    const double sigma = std::hypot(3.6, 3.8) / kFwhmPerSigma;
    const double t20 = jitter_tolerance(flat_top(20.0), sigma, 0.45);
    const double t10 = jitter_tolerance(flat_top(10.0), sigma, 0.45);
    CHECK(t10 > t20);
    CHECK(t20 >= 12.0 / 2.5);
    CHECK(t20 <= 12.0 * 2.5);
    CHECK(t10 >= 25.0 / 2.5);
    CHECK(t10 <= 25.0 * 2.5);

    CHECK_THROWS_AS(jitter_tolerance(unfiltered(), 7.0, 0.45), InputError);
    CHECK_THROWS_AS(jitter_tolerance(unfiltered(), 0.0, 0.5), InputError);
    CHECK_THROWS_AS(jitter_tolerance(unfiltered(), 0.0, 0.0), InputError);
}
