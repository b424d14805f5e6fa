#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpicomp/kpi_model.hpp"
#include "kpicomp/quantizer.hpp"
#include "kpicomp/transforms.hpp"

namespace kpicomp {

enum class CodecId { Pcm, Dpcm, Dct, Klt };

std::string_view codec_name(CodecId id);
/// "pcm", "dpcm", "dct", "klt"; throws std::invalid_argument otherwise.
CodecId parse_codec(std::string_view name);

/// A codec choice. The KLT variant always carries its trained basis.
class CodecKind {
public:
    static CodecKind pcm() { return CodecKind(CodecId::Pcm, nullptr); }
    static CodecKind dpcm() { return CodecKind(CodecId::Dpcm, nullptr); }
    static CodecKind dct() { return CodecKind(CodecId::Dct, nullptr); }
    static CodecKind klt(std::shared_ptr<const KltBasis> basis);

    CodecId id() const noexcept { return id_; }
    std::string_view name() const noexcept { return codec_name(id_); }
    bool is_transform() const noexcept { return id_ == CodecId::Dct || id_ == CodecId::Klt; }
    /// Non-null exactly for the KLT variant.
    const std::shared_ptr<const KltBasis>& klt_basis() const noexcept { return klt_; }
    /// Forward operator rows for transform codecs.
    const SquareMatrix& analysis() const;

    bool operator==(const CodecKind& other) const noexcept { return id_ == other.id_ && klt_ == other.klt_; }

private:
    CodecKind(CodecId id, std::shared_ptr<const KltBasis> klt) : id_(id), klt_(std::move(klt)) {}

    CodecId id_;
    std::shared_ptr<const KltBasis> klt_;
};

/// Shared 168-point DCT, built once.
const DctBasis& shared_dct();

struct CodecResult {
    std::string cell_id;
    CodecKind codec;
    double delta;
    std::vector<IndexStream> index_streams;  ///< one per series (PCM/DPCM) or per week (transforms)
    std::vector<double> reconstruction;
    std::size_t side_info_samples = 0;       ///< samples sent uncoded (DPCM's first sample)
    std::vector<double> side_info;           ///< their values

    std::size_t index_count() const;
};

CodecResult encode_pcm(const CellSeries& series, double delta);
/// Closed-loop first-order DPCM; x̂[0] = x[0] travels as side information.
CodecResult encode_dpcm(const CellSeries& series, double delta);
/// Weekly block transform coding with one shared step for all coefficients.
CodecResult encode_transform(const CellSeries& series, double delta, const CodecKind& transform);
CodecResult encode(const CellSeries& series, const CodecKind& codec, double delta);

/// Decoder path: rebuilds the reconstruction from indices, step, side info and basis only.
std::vector<double> decode(const CodecKind& codec, double delta, std::size_t length,
                           std::span<const IndexStream> streams, std::span<const double> side_info);

struct CodecRun {
    std::vector<CodecResult> results;  ///< sorted by cell_id
    RateEstimate rate;
    /// Amortized cost of uncoded side samples at 32 bits each; not part of rate.
    double side_info_bits_per_sample = 0.0;
};

/**
 * Applies a codec to every eligible cell and pools all indices into one
 * entropy estimate. KLT runs skip the basis' training cells. Throws
 * EmptyDatasetError when no cell is eligible.
 */
CodecRun run_codec(const Dataset& dataset, const CodecKind& codec, double delta);

/// Cells a codec may be evaluated on (all, or all minus KLT training cells).
Dataset eligible_cells(const Dataset& dataset, const CodecKind& codec);

// --- serialized artifact -------------------------------------------------

struct EncodedHeader {
    CodecId codec;
    double delta;
    KpiKind kpi;
    HourStamp start;
    std::size_t length;
    std::vector<std::string> cell_ids;
    std::string basis_fingerprint;  ///< KLT only
};

struct DecodedCell {
    std::string cell_id;
    std::vector<IndexStream> index_streams;
    std::vector<double> side_info;
    std::vector<double> reconstruction;
};

struct DecodedArtifact {
    EncodedHeader header;
    std::vector<DecodedCell> cells;
};

/**
 * Serializes codec output. Layout:
 *   "KPCZ" | u8 version | u32le header size | JSON header |
 *   per cell, in header order: side-info samples as f64le, then zigzag LEB128 indices.
 */
std::vector<std::uint8_t> serialize_results(std::span<const CodecResult> results, KpiKind kpi, HourStamp start);

/// Parses and decodes an artifact. `klt` is required for KLT artifacts and must match the fingerprint.
DecodedArtifact deserialize_results(std::span<const std::uint8_t> bytes, std::shared_ptr<const KltBasis> klt = nullptr);

/// Reads just the header (codec, step, cells) of an artifact.
EncodedHeader read_header(std::span<const std::uint8_t> bytes);

}  // namespace kpicomp
