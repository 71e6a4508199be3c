#include "pulsehom/analysis_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>

#include <fmt/format.h>

#include "pulsehom/errors.hpp"

namespace pulsehom {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc() && ptr == end && std::isfinite(out);
}

double checked_sample(std::string_view text, const std::filesystem::path& path, int line) {
    double value = 0.0;
    if (!parse_double(text, value))
        throw InputError(fmt::format("{}:{}: malformed intensity '{}'", path.string(), line,
                                     std::string(trim(text))));
    if (value < 0.0)
        throw InputError(fmt::format("{}:{}: negative intensity {}", path.string(), line, value));
    return value;
}

}  // namespace

double g2_from_sums(double sum, double sum_sq, double count) {
    const double mean = sum / count;
    return (sum_sq / count) / (mean * mean);
}

double g2_from_shifted_sums(double shift, double sum, double sum_sq, double count) {
    const double offset = sum / count;
    const double var = std::max(0.0, sum_sq / count - offset * offset);
    const double mean = shift + offset;
    return 1.0 + var / (mean * mean);
}

G2Estimate estimate_g2(const IntensityTrace& trace) {
    const auto& x = trace.samples;
    if (x.size() < kMinTraceLength)
        throw InputError(fmt::format("trace has {} samples; at least {} are required", x.size(),
                                     kMinTraceLength));
    if (std::any_of(x.begin(), x.end(), [](double v) { return !(v >= 0.0); }))
        throw InputError("trace contains negative or non-finite intensities");

    const std::size_t n = x.size();
    // Two passes per range: the mean, then centered moments, so g2 - 1 keeps
    // its precision when the trace is nearly constant.
    auto g2_of = [&](std::size_t first, std::size_t last) {
        double sum = 0.0;
        for (std::size_t i = first; i < last; ++i) sum += x[i];
        const double count = static_cast<double>(last - first);
        const double mean = sum / count;
        double dev = 0.0;
        double dev_sq = 0.0;
        for (std::size_t i = first; i < last; ++i) {
            const double d = x[i] - mean;
            dev += d;
            dev_sq += d * d;
        }
        return mean > 0.0 ? g2_from_shifted_sums(mean, dev, dev_sq, count) : 1.0;
    };

    double total = 0.0;
    for (double v : x) total += v;
    if (!(total > 0.0)) throw InputError("trace has zero mean intensity");

    // Batch means; the last batch absorbs the remainder.
    const std::size_t batch = n / kG2Batches;
    std::vector<double> batch_g2;
    batch_g2.reserve(kG2Batches);
    for (std::size_t b = 0; b < kG2Batches; ++b) {
        const std::size_t first = b * batch;
        const std::size_t last = b + 1 == kG2Batches ? n : first + batch;
        batch_g2.push_back(g2_of(first, last));
    }

    G2Estimate out;
    out.g2 = g2_of(0, n);
    double mean = 0.0;
    for (double g : batch_g2) mean += g;
    mean /= static_cast<double>(batch_g2.size());
    double var = 0.0;
    for (double g : batch_g2) var += (g - mean) * (g - mean);
    var /= static_cast<double>(batch_g2.size() - 1);
    out.std_error = std::sqrt(var / static_cast<double>(batch_g2.size()));
    return out;
}

double vhom_from_g2(double g2) { return g2 - 1.0; }

IntensityTrace quantize_8bit(const IntensityTrace& trace) {
    IntensityTrace out = trace;
    const auto top = std::max_element(trace.samples.begin(), trace.samples.end());
    if (top == trace.samples.end() || !(*top > 0.0)) return out;
    const double step = *top / 255.0;
    for (double& v : out.samples) v = std::round(v / step) * step;
    if (!out.metadata.empty()) out.metadata += "; ";
    out.metadata += "quantized to 8 bits";
    return out;
}

IntensityTrace ingest_trace(const std::filesystem::path& path, TraceFormat format, bool quantize) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open trace file " + path.string());

    IntensityTrace trace;
    trace.metadata = "ingested from " + path.filename().string();
    std::vector<double> times;
    bool period_from_header = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view row = trim(line);
        if (row.empty()) continue;
        if (row.front() == '#') {
            constexpr std::string_view kPeriodKey = "sample_period_ps=";
            const auto pos = row.find(kPeriodKey);
            if (pos != std::string_view::npos) {
                double period = 0.0;
                if (!parse_double(row.substr(pos + kPeriodKey.size()), period) || !(period > 0.0))
                    throw InputError(fmt::format("{}:{}: bad sample period", path.string(), line_no));
                trace.sample_period = period;
                period_from_header = true;
            }
            continue;
        }
        const auto comma = row.find(',');
        if (format == TraceFormat::automatic)
            format = comma == std::string_view::npos ? TraceFormat::values
                                                     : TraceFormat::time_intensity;
        if (format == TraceFormat::values) {
            if (comma != std::string_view::npos)
                throw InputError(fmt::format("{}:{}: expected a single value", path.string(), line_no));
            trace.samples.push_back(checked_sample(row, path, line_no));
        } else {
            if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos)
                throw InputError(
                    fmt::format("{}:{}: expected 'time,intensity'", path.string(), line_no));
            double t = 0.0;
            if (!parse_double(row.substr(0, comma), t))
                throw InputError(fmt::format("{}:{}: malformed time '{}'", path.string(), line_no,
                                             std::string(trim(row.substr(0, comma)))));
            times.push_back(t);
            trace.samples.push_back(checked_sample(row.substr(comma + 1), path, line_no));
        }
    }
    if (trace.samples.empty()) throw InputError("trace file " + path.string() + " has no samples");

    if (times.size() >= 2 && !period_from_header) {
        const double period = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        if (!(period > 0.0)) throw InputError(path.string() + ": time column must increase");
        trace.sample_period = period;
    }
    return quantize ? quantize_8bit(trace) : trace;
}

void write_trace(const std::filesystem::path& path, const IntensityTrace& trace) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write trace file " + path.string());
    out << fmt::format("# sample_period_ps={:.17g}\n", trace.sample_period);
    if (!trace.metadata.empty()) out << "# " << trace.metadata << '\n';
    for (double v : trace.samples) out << fmt::format("{:.17g}\n", v);
    if (!out) throw InputError("failed writing trace file " + path.string());
}

}  // namespace pulsehom
