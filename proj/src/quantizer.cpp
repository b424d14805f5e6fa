#include "kpicomp/quantizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kpicomp {

namespace {

// |index| must stay well inside int64 so Δ·index stays exact enough.
constexpr double kMaxIndex = 4.611686018427387904e18;  // 2^62

}  // namespace

QuantizerConfig::QuantizerConfig(double delta) : delta_(delta)
{
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw std::invalid_argument("quantizer step must be positive and finite, got " + std::to_string(delta));
    }
}

Quantized quantize(double u, const QuantizerConfig& cfg)
{
    if (!std::isfinite(u)) throw std::invalid_argument("cannot quantize a non-finite value");
    // nearbyint honours the default FE_TONEAREST mode: round half to even.
    const double q = std::nearbyint(u / cfg.delta());
    if (std::fabs(q) >= kMaxIndex) throw std::overflow_error("quantization index exceeds 2^62");
    const auto index = static_cast<std::int64_t>(q);
    return {index, dequantize(index, cfg)};
}

QuantizedVector quantize_vector(std::span<const double> values, const QuantizerConfig& cfg)
{
    QuantizedVector out;
    out.stream.indices.reserve(values.size());
    out.reconstructed.reserve(values.size());
    for (double v : values) {
        const auto q = quantize(v, cfg);
        out.stream.indices.push_back(q.index);
        out.reconstructed.push_back(q.reconstructed);
    }
    return out;
}

void accumulate(std::map<std::int64_t, std::uint64_t>& histogram, const IndexStream& stream)
{
    for (auto i : stream.indices) ++histogram[i];
}

RateEstimate entropy_of(std::map<std::int64_t, std::uint64_t> histogram)
{
    std::uint64_t total = 0;
    for (const auto& [index, count] : histogram) total += count;
    if (total == 0) throw std::invalid_argument("entropy of an empty index collection is undefined");

    // Neumaier-compensated sum; large alphabets otherwise lose ~1e-10 bits.
    const double n = static_cast<double>(total);
    double nats = 0.0, carry = 0.0;
    for (const auto& [index, count] : histogram) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        const double term = -p * std::log(p);
        const double t = nats + term;
        carry += std::fabs(nats) >= std::fabs(term) ? (nats - t) + term : (term - t) + nats;
        nats = t;
    }
    nats += carry;
    RateEstimate out;
    out.bits_per_sample = nats > 0.0 ? nats / std::log(2.0) : 0.0;
    out.histogram = std::move(histogram);
    out.total_count = total;
    return out;
}

RateEstimate entropy_rate(std::span<const IndexStream> streams)
{
    std::map<std::int64_t, std::uint64_t> histogram;
    for (const auto& s : streams) accumulate(histogram, s);
    return entropy_of(std::move(histogram));
}

}  // namespace kpicomp
