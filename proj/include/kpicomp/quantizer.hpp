#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace kpicomp {

/// Uniform scalar quantizer step. Always positive and finite.
class QuantizerConfig {
public:
    explicit QuantizerConfig(double delta);
    double delta() const noexcept { return delta_; }

private:
    double delta_;
};

/// Integer indices round(u / delta) emitted by a codec.
struct IndexStream {
    std::vector<std::int64_t> indices;

    bool operator==(const IndexStream&) const = default;
};

/// Entropy-rate estimate under ideal entropy coding.
struct RateEstimate {
    double bits_per_sample = 0.0;
    std::map<std::int64_t, std::uint64_t> histogram;
    std::uint64_t total_count = 0;
};

struct Quantized {
    std::int64_t index;
    double reconstructed;
};

/// Q(u) = delta * round(u / delta); ties round to the even index.
Quantized quantize(double u, const QuantizerConfig& cfg);

/// Dequantization, the decoder-side half of quantize().
inline double dequantize(std::int64_t index, const QuantizerConfig& cfg)
{
    return cfg.delta() * static_cast<double>(index);
}

struct QuantizedVector {
    IndexStream stream;
    std::vector<double> reconstructed;
};

QuantizedVector quantize_vector(std::span<const double> values, const QuantizerConfig& cfg);

/// Adds every index of `stream` to `histogram`.
void accumulate(std::map<std::int64_t, std::uint64_t>& histogram, const IndexStream& stream);

/// Shannon entropy (bits) of a histogram; throws std::invalid_argument when empty.
RateEstimate entropy_of(std::map<std::int64_t, std::uint64_t> histogram);

/// Pools all indices of all streams into one histogram and returns its entropy.
RateEstimate entropy_rate(std::span<const IndexStream> streams);

}  // namespace kpicomp
