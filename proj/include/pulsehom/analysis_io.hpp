#pragma once

// Intensity-correlation estimators and trace interchange.

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pulsehom {

struct IntensityTrace {
    std::vector<double> samples;
    double sample_period = 1000.0;  // ps
    std::string metadata;
};

inline constexpr std::size_t kMinTraceLength = 100;
inline constexpr std::size_t kG2Batches = 20;

struct G2Estimate {
    double g2 = 0.0;
    double std_error = 0.0;  // batch means over kG2Batches batches
};

// Second-order correlation <I^2> / <I>^2 from running sums.
double g2_from_sums(double sum, double sum_sq, double count);

// Same from sums of (I - shift) and (I - shift)^2. With shift near the mean,
// g2 - 1 = var / mean^2 keeps its relative precision even when tiny.
double g2_from_shifted_sums(double shift, double sum, double sum_sq, double count);

// Throws InputError for short traces, negative samples or a zero mean.
G2Estimate estimate_g2(const IntensityTrace& trace);

double vhom_from_g2(double g2);

// Re-quantize to 256 levels spanning [0, max], emulating an 8-bit scope.
IntensityTrace quantize_8bit(const IntensityTrace& trace);

enum class TraceFormat {
    automatic,       // detect from the first data row
    values,          // one intensity per line
    time_intensity,  // "time_ps,intensity"
};

// Lines starting with '#' are comments; "# sample_period_ps=<x>" sets the
// period of a value-only file (default 1000 ps). Malformed rows are
// reported with their line number.
IntensityTrace ingest_trace(const std::filesystem::path& path,
                            TraceFormat format = TraceFormat::automatic,
                            bool quantize = false);

// Writes the value-only format; reading it back returns identical samples.
void write_trace(const std::filesystem::path& path, const IntensityTrace& trace);

}  // namespace pulsehom
