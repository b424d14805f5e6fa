#include "kpicomp/codecs.hpp"

#include <bit>
#include <cstring>
#include <map>

#include <json.hpp>

#include "kpicomp/parallel.hpp"

namespace kpicomp {

std::string_view codec_name(CodecId id)
{
    switch (id) {
    case CodecId::Pcm: return "pcm";
    case CodecId::Dpcm: return "dpcm";
    case CodecId::Dct: return "dct";
    case CodecId::Klt: return "klt";
    }
    return "?";
}

CodecId parse_codec(std::string_view name)
{
    if (name == "pcm") return CodecId::Pcm;
    if (name == "dpcm") return CodecId::Dpcm;
    if (name == "dct") return CodecId::Dct;
    if (name == "klt") return CodecId::Klt;
    throw std::invalid_argument("unknown codec '" + std::string(name) + "' (expected pcm, dpcm, dct or klt)");
}

CodecKind CodecKind::klt(std::shared_ptr<const KltBasis> basis)
{
    if (!basis) throw std::invalid_argument("the KLT codec requires a trained basis");
    if (basis->size() != kWeekLength) throw DimensionError("KLT basis must be 168x168");
    return CodecKind(CodecId::Klt, std::move(basis));
}

const DctBasis& shared_dct()
{
    static const DctBasis basis = build_dct();
    return basis;
}

const SquareMatrix& CodecKind::analysis() const
{
    switch (id_) {
    case CodecId::Dct: return shared_dct().analysis();
    case CodecId::Klt: return klt_->analysis();
    default: throw std::logic_error("codec '" + std::string(name()) + "' has no transform");
    }
}

std::size_t CodecResult::index_count() const
{
    std::size_t n = 0;
    for (const auto& s : index_streams) n += s.indices.size();
    return n;
}

namespace {

std::vector<double> decode_pcm(double delta, std::span<const IndexStream> streams)
{
    const QuantizerConfig cfg(delta);
    std::vector<double> out;
    for (const auto& s : streams)
        for (auto i : s.indices) out.push_back(dequantize(i, cfg));
    return out;
}

std::vector<double> decode_transform(const SquareMatrix& analysis, double delta, std::span<const IndexStream> streams)
{
    const QuantizerConfig cfg(delta);
    std::vector<double> out;
    out.reserve(streams.size() * analysis.size());
    std::vector<double> coeffs(analysis.size());
    for (const auto& s : streams) {
        if (s.indices.size() != analysis.size()) throw DimensionError("transform block has wrong index count");
        for (std::size_t k = 0; k < coeffs.size(); ++k) coeffs[k] = dequantize(s.indices[k], cfg);
        const auto block = inverse(analysis, coeffs);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

}  // namespace

CodecResult encode_pcm(const CellSeries& series, double delta)
{
    auto q = quantize_vector(series.samples(), QuantizerConfig(delta));
    CodecResult r{series.cell_id(), CodecKind::pcm(), delta, {}, std::move(q.reconstructed), 0, {}};
    r.index_streams.push_back(std::move(q.stream));
    return r;
}

CodecResult encode_dpcm(const CellSeries& series, double delta)
{
    const QuantizerConfig cfg(delta);
    const auto x = series.samples();
    IndexStream residuals;
    residuals.indices.reserve(x.size() - 1);
    std::vector<double> recon(x.size());
    recon[0] = x[0];
    for (std::size_t n = 1; n < x.size(); ++n) {
        const auto q = quantize(x[n] - recon[n - 1], cfg);
        residuals.indices.push_back(q.index);
        recon[n] = recon[n - 1] + q.reconstructed;
    }
    CodecResult r{series.cell_id(), CodecKind::dpcm(), delta, {}, std::move(recon), 1, {x[0]}};
    r.index_streams.push_back(std::move(residuals));
    return r;
}

CodecResult encode_transform(const CellSeries& series, double delta, const CodecKind& transform)
{
    if (!transform.is_transform()) throw std::invalid_argument("encode_transform needs the DCT or KLT codec");
    if (series.size() % kWeekLength != 0) {
        throw DimensionError("transform coding needs a whole number of weeks; cell '" + series.cell_id() + "' has " +
                             std::to_string(series.size()) + " samples");
    }
    const QuantizerConfig cfg(delta);
    const auto& analysis = transform.analysis();
    CodecResult r{series.cell_id(), transform, delta, {}, {}, 0, {}};
    const auto x = series.samples();
    for (std::size_t b = 0; b < x.size() / kWeekLength; ++b) {
        const auto coeffs = forward(analysis, x.subspan(b * kWeekLength, kWeekLength));
        r.index_streams.push_back(quantize_vector(coeffs, cfg).stream);
    }
    r.reconstruction = decode_transform(analysis, delta, r.index_streams);
    return r;
}

CodecResult encode(const CellSeries& series, const CodecKind& codec, double delta)
{
    switch (codec.id()) {
    case CodecId::Pcm: return encode_pcm(series, delta);
    case CodecId::Dpcm: return encode_dpcm(series, delta);
    case CodecId::Dct:
    case CodecId::Klt: return encode_transform(series, delta, codec);
    }
    throw std::logic_error("unreachable codec");
}

std::vector<double> decode(const CodecKind& codec, double delta, std::size_t length, std::span<const IndexStream> streams,
                           std::span<const double> side_info)
{
    std::vector<double> out;
    switch (codec.id()) {
    case CodecId::Pcm: out = decode_pcm(delta, streams); break;
    case CodecId::Dpcm: {
        if (side_info.size() != 1) throw std::invalid_argument("DPCM decoding needs exactly one side-info sample");
        const QuantizerConfig cfg(delta);
        out.push_back(side_info[0]);
        for (const auto& s : streams)
            for (auto i : s.indices) out.push_back(out.back() + dequantize(i, cfg));
        break;
    }
    case CodecId::Dct:
    case CodecId::Klt: out = decode_transform(codec.analysis(), delta, streams); break;
    }
    if (out.size() != length) {
        throw DimensionError("decoded " + std::to_string(out.size()) + " samples, expected " + std::to_string(length));
    }
    return out;
}

Dataset eligible_cells(const Dataset& dataset, const CodecKind& codec)
{
    if (codec.id() != CodecId::Klt) return dataset;
    return dataset.without(codec.klt_basis()->training_cell_ids());
}

CodecRun run_codec(const Dataset& dataset, const CodecKind& codec, double delta)
{
    const auto eligible = eligible_cells(dataset, codec);
    if (eligible.cell_count() == 0) {
        throw EmptyDatasetError("no cell left to evaluate codec '" + std::string(codec.name()) + "'");
    }
    CodecRun run;
    run.results.resize(eligible.cell_count(), CodecResult{"", codec, delta, {}, {}, 0, {}});
    parallel_for(eligible.cell_count(), [&](std::size_t i) { run.results[i] = encode(eligible.cells()[i], codec, delta); });

    std::map<std::int64_t, std::uint64_t> histogram;
    std::size_t side = 0;
    std::size_t samples = 0;
    for (const auto& r : run.results) {
        for (const auto& s : r.index_streams) accumulate(histogram, s);
        side += r.side_info_samples;
        samples += r.reconstruction.size();
    }
    run.rate = entropy_of(std::move(histogram));
    run.side_info_bits_per_sample = 32.0 * static_cast<double>(side) / static_cast<double>(samples);
    return run;
}

// --- serialization -------------------------------------------------------

namespace {

constexpr std::uint8_t kFormatVersion = 1;

void put_u64le(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_varint(std::vector<std::uint8_t>& out, std::int64_t value)
{
    auto z = (static_cast<std::uint64_t>(value) << 1) ^ static_cast<std::uint64_t>(value >> 63);
    while (z >= 0x80) {
        out.push_back(static_cast<std::uint8_t>(z | 0x80));
        z >>= 7;
    }
    out.push_back(static_cast<std::uint8_t>(z));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint8_t byte()
    {
        if (pos_ >= bytes_.size()) throw std::runtime_error("encoded artifact is truncated");
        return bytes_[pos_++];
    }
    std::uint64_t u64le()
    {
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
        return v;
    }
    std::uint32_t u32le()
    {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
        return v;
    }
    std::int64_t varint()
    {
        std::uint64_t z = 0;
        for (int shift = 0;; shift += 7) {
            if (shift > 63) throw std::runtime_error("malformed varint in encoded artifact");
            const auto b = byte();
            z |= static_cast<std::uint64_t>(b & 0x7f) << shift;
            if ((b & 0x80) == 0) break;
        }
        return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
    }
    std::string_view chars(std::size_t n)
    {
        if (bytes_.size() - pos_ < n) throw std::runtime_error("encoded artifact is truncated");
        std::string_view s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == bytes_.size(); }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::size_t index_count_for(CodecId codec, std::size_t length)
{
    return codec == CodecId::Dpcm ? length - 1 : length;
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

EncodedHeader parse_header(Reader& in)
{
    if (in.chars(4) != "KPCZ") throw std::runtime_error("not a kpicomp artifact (bad magic)");
    if (const auto v = in.byte(); v != kFormatVersion) {
        throw std::runtime_error("unsupported artifact version " + std::to_string(v));
    }
    const auto header_size = in.u32le();
    const auto j = nlohmann::json::parse(in.chars(header_size));
    EncodedHeader h{};
    h.codec = parse_codec(j.at("codec").get<std::string>());
    h.delta = std::bit_cast<double>(std::stoull(j.at("delta_bits").get<std::string>(), nullptr, 16));
    h.kpi = parse_kpi(j.at("kpi").get<std::string>());
    h.start = parse_hour_stamp(j.at("start").get<std::string>());
    h.length = j.at("length").get<std::size_t>();
    h.cell_ids = j.at("cells").get<std::vector<std::string>>();
    h.basis_fingerprint = j.value("basis_fingerprint", "");
    return h;
}

}  // namespace

std::vector<std::uint8_t> serialize_results(std::span<const CodecResult> results, KpiKind kpi, HourStamp start)
{
    if (results.empty()) throw std::invalid_argument("nothing to serialize");
    const auto& first = results.front();
    const auto length = first.reconstruction.size();

    nlohmann::json j;
    j["codec"] = first.codec.name();
    j["delta"] = first.delta;
    j["delta_bits"] = hex64(std::bit_cast<std::uint64_t>(first.delta));
    j["kpi"] = kpi_token(kpi);
    j["start"] = format_hour_stamp(start);
    j["length"] = length;
    j["side_info_samples_per_cell"] = first.side_info_samples;
    if (first.codec.id() == CodecId::Klt) j["basis_fingerprint"] = first.codec.klt_basis()->fingerprint();
    std::vector<std::string> ids;
    for (const auto& r : results) {
        if (!(r.codec == first.codec) || r.delta != first.delta || r.reconstruction.size() != length) {
            throw std::invalid_argument("all serialized results must share codec, step and length");
        }
        ids.push_back(r.cell_id);
    }
    j["cells"] = ids;
    const auto header = j.dump();

    std::vector<std::uint8_t> out{'K', 'P', 'C', 'Z', kFormatVersion};
    const auto size = static_cast<std::uint32_t>(header.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(size >> (8 * i)));
    out.insert(out.end(), header.begin(), header.end());
    for (const auto& r : results) {
        for (double v : r.side_info) put_u64le(out, std::bit_cast<std::uint64_t>(v));
        for (const auto& s : r.index_streams)
            for (auto i : s.indices) put_varint(out, i);
    }
    return out;
}

EncodedHeader read_header(std::span<const std::uint8_t> bytes)
{
    Reader in(bytes);
    return parse_header(in);
}

DecodedArtifact deserialize_results(std::span<const std::uint8_t> bytes, std::shared_ptr<const KltBasis> klt)
{
    Reader in(bytes);
    DecodedArtifact out{parse_header(in), {}};
    const auto& h = out.header;

    CodecKind codec = CodecKind::pcm();
    switch (h.codec) {
    case CodecId::Pcm: break;
    case CodecId::Dpcm: codec = CodecKind::dpcm(); break;
    case CodecId::Dct: codec = CodecKind::dct(); break;
    case CodecId::Klt:
        if (!klt) throw std::invalid_argument("decoding a KLT artifact requires its basis");
        if (klt->fingerprint() != h.basis_fingerprint) {
            throw std::invalid_argument("KLT basis fingerprint " + klt->fingerprint() +
                                        " does not match artifact (" + h.basis_fingerprint + ")");
        }
        codec = CodecKind::klt(std::move(klt));
        break;
    }

    const auto per_cell = index_count_for(h.codec, h.length);
    for (const auto& id : h.cell_ids) {
        DecodedCell cell;
        cell.cell_id = id;
        if (h.codec == CodecId::Dpcm) cell.side_info.push_back(std::bit_cast<double>(in.u64le()));
        if (codec.is_transform()) {
            for (std::size_t b = 0; b < h.length / kWeekLength; ++b) {
                IndexStream s;
                s.indices.reserve(kWeekLength);
                for (std::size_t k = 0; k < kWeekLength; ++k) s.indices.push_back(in.varint());
                cell.index_streams.push_back(std::move(s));
            }
        } else {
            IndexStream s;
            s.indices.reserve(per_cell);
            for (std::size_t k = 0; k < per_cell; ++k) s.indices.push_back(in.varint());
            cell.index_streams.push_back(std::move(s));
        }
        cell.reconstruction = decode(codec, h.delta, h.length, cell.index_streams, cell.side_info);
        out.cells.push_back(std::move(cell));
    }
    if (!in.done()) throw std::runtime_error("trailing bytes after encoded payload");
    return out;
}

}  // namespace kpicomp
