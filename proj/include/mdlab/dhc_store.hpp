#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mdlab/dsc.hpp"
#include "mdlab/error.hpp"
#include "mdlab/huffman.hpp"
#include "mdlab/io_util.hpp"
#include "mdlab/page_cache.hpp"
#include "mdlab/relation.hpp"

namespace mdlab {

struct DhcJump {
    std::uint64_t logical = 0;
    std::uint64_t physical = 0;
    std::uint64_t bit_offset = 0;  // first bit after this segment's zero symbol
};

/// Jump sequence plus Huffman-coded difference sequence.
struct DhcHeader {
    DscParams params;
    std::uint64_t n_cells = 0;
    CanonicalCode code;
    std::vector<DhcJump> jumps;
    BitStream bitstream;
};

inline DhcHeader build_dhc_header(const DscHeader& dsc) {
    DhcHeader h;
    h.params = dsc.params;
    h.n_cells = dsc.n_cells();
    SymbolFrequencyTable freqs;
    for (std::uint32_t d : dsc.differences) ++freqs[d];
    h.code = build_code(freqs);
    h.jumps.reserve(dsc.jumps.size());
    std::size_t next_jump = 0;
    for (std::size_t i = 0; i < dsc.differences.size(); ++i) {
        h.code.append_codeword(h.bitstream, dsc.differences[i]);
        if (dsc.differences[i] == 0) {
            const JumpRecord& j = dsc.jumps[next_jump++];
            h.jumps.push_back({j.logical, j.physical, h.bitstream.bit_length});
        }
    }
    return h;
}

inline std::vector<std::uint32_t> dhc_decode_differences(const DhcHeader& h) {
    auto [symbols, end_bit] = decode_prefix(h.code, h.bitstream, 0, h.n_cells);
    if (symbols.size() != h.n_cells || end_bit != h.bitstream.bit_length)
        throw CorruptHeader("bitstream does not decode to N differences");
    return symbols;
}

/// Stop-early search over the Huffman-coded differences; decodes only the
/// segment anchored at the chosen jump.
inline std::optional<std::uint64_t> dhc_search(const DhcHeader& h, std::uint64_t target,
                                               std::uint64_t* decoded = nullptr) {
    if (decoded) *decoded = 0;
    auto it = std::upper_bound(h.jumps.begin(), h.jumps.end(), target,
                               [](std::uint64_t t, const DhcJump& j) { return t < j.logical; });
    if (it == h.jumps.begin()) return std::nullopt;
    --it;
    if (it->logical == target) return it->physical;
    std::uint64_t pos = it->logical;
    std::uint64_t phys = it->physical;
    std::uint64_t bit = it->bit_offset;
    while (bit < h.bitstream.bit_length) {
        std::uint32_t d = h.code.decode_one(h.bitstream, bit);
        if (decoded) ++*decoded;
        if (d == 0) return std::nullopt;  // next segment begins
        pos += d;
        ++phys;
        if (pos == target) return phys;
        if (pos > target) return std::nullopt;
    }
    return std::nullopt;
}

inline constexpr std::size_t kDhcFileHeaderBytes = 32;

// "DHC1", version, s, N, K, reserved to 32 bytes; K jump records
// (logical, physical, bit_offset; 8B LE each); code table; bit length
// (8B LE) and the packed bitstream.
inline std::vector<std::uint8_t> serialize_dhc(const DhcHeader& h) {
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'D', 'H', 'C', '1'});
    io::put_u8(out, 1);
    io::put_u8(out, h.params.s);
    io::put_u64(out, h.n_cells);
    io::put_u64(out, h.jumps.size());
    out.resize(kDhcFileHeaderBytes, 0);
    for (const auto& j : h.jumps) {
        io::put_u64(out, j.logical);
        io::put_u64(out, j.physical);
        io::put_u64(out, j.bit_offset);
    }
    serialize_code(h.code, out);
    io::put_u64(out, h.bitstream.bit_length);
    out.insert(out.end(), h.bitstream.bytes.begin(), h.bitstream.bytes.end());
    return out;
}

inline DhcHeader deserialize_dhc(const std::vector<std::uint8_t>& buf) {
    io::ByteReader r(buf);
    char magic[4];
    r.bytes(magic, 4);
    if (std::string(magic, 4) != "DHC1") throw FormatError("bad DHC magic");
    if (r.u8() != 1) throw FormatError("unsupported DHC version");
    DhcHeader h;
    h.params = DscParams(r.u8());
    h.n_cells = r.u64();
    std::uint64_t k = r.u64();
    while (r.pos() < kDhcFileHeaderBytes) r.u8();
    h.jumps.resize(k);
    for (auto& j : h.jumps) {
        j.logical = r.u64();
        j.physical = r.u64();
        j.bit_offset = r.u64();
    }
    h.code = deserialize_code(r);
    h.bitstream.bit_length = r.u64();
    h.bitstream.bytes.resize((h.bitstream.bit_length + 7) / 8);
    r.bytes(h.bitstream.bytes.data(), h.bitstream.bytes.size());
    return h;
}

// --- Multidimensional store --------------------------------------------

inline constexpr std::uint32_t kCellFileId = 0;

/// DHC header + compressed cell array + dimension arrays. The header and
/// dimension labels are memory-resident; only cell pages are counted
/// against the buffer cache.
class MultidimStore {
public:
    MultidimStore(RelationSchema schema, DhcHeader header, std::vector<double> measures)
        : schema_(std::move(schema)), header_(std::move(header)), measures_(std::move(measures)) {
        cells_per_page_ = kPageSize / cell_width();
        if (cells_per_page_ == 0) throw FormatError("cell wider than a page");
        compute_sizes();
    }

    const RelationSchema& schema() const { return schema_; }
    const DhcHeader& header() const { return header_; }
    std::uint64_t n_cells() const { return header_.n_cells; }

    std::uint64_t cell_width() const { return schema_.measure_count * 8ull; }
    std::uint64_t cells_per_page() const { return cells_per_page_; }
    std::uint64_t cell_pages() const {
        return (header_.n_cells + cells_per_page_ - 1) / cells_per_page_;
    }

    std::uint64_t h_bytes() const { return h_bytes_; }
    std::uint64_t c_bytes() const { return c_bytes_; }

    /// Point query. Page touches on the cell array go through `cache`
    /// when one is supplied; `decoded` reports decode work.
    std::optional<std::vector<double>> lookup(const CompositeKey& key, PageCache* cache = nullptr,
                                              std::uint64_t* decoded = nullptr) const {
        std::uint64_t pos = linearize(schema_, key);
        auto phys = dhc_search(header_, pos, decoded);
        if (!phys) return std::nullopt;
        if (cache) cache->access({kCellFileId, *phys / cells_per_page_});
        auto begin = measures_.begin() + static_cast<std::ptrdiff_t>(*phys * schema_.measure_count);
        return std::vector<double>(begin, begin + schema_.measure_count);
    }

    void write(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        io::write_file(dir / "header.dhc", serialize_dhc(header_));
        io::write_file(dir / "cells.bin", cell_pages_bytes());
        io::write_file(dir / "dims.bin", dims_bytes());
    }

    static MultidimStore open(const std::filesystem::path& dir) {
        DhcHeader header = deserialize_dhc(io::read_file(dir / "header.dhc"));
        RelationSchema schema = read_dims(io::read_file(dir / "dims.bin"));
        auto cells = io::read_file(dir / "cells.bin");
        std::uint64_t width = schema.measure_count * 8ull;
        std::uint64_t per_page = kPageSize / width;
        std::vector<double> measures(header.n_cells * schema.measure_count);
        for (std::uint64_t i = 0; i < header.n_cells; ++i) {
            std::uint64_t off = (i / per_page) * kPageSize + (i % per_page) * width;
            std::memcpy(&measures[i * schema.measure_count], cells.data() + off, width);
        }
        return MultidimStore(std::move(schema), std::move(header), std::move(measures));
    }

    std::vector<std::uint8_t> cell_pages_bytes() const {
        std::vector<std::uint8_t> out(cell_pages() * kPageSize, 0);
        const std::uint64_t width = cell_width();
        for (std::uint64_t i = 0; i < header_.n_cells; ++i) {
            std::uint64_t off = (i / cells_per_page_) * kPageSize + (i % cells_per_page_) * width;
            std::memcpy(out.data() + off, &measures_[i * schema_.measure_count], width);
        }
        return out;
    }

    std::vector<std::uint8_t> dims_bytes() const {
        std::vector<std::uint8_t> out;
        io::put_u32(out, static_cast<std::uint32_t>(schema_.dimensions.size()));
        io::put_u32(out, schema_.measure_count);
        for (const auto& d : schema_.dimensions) {
            io::put_u16(out, static_cast<std::uint16_t>(d.name.size()));
            out.insert(out.end(), d.name.begin(), d.name.end());
            io::put_u32(out, d.cardinality());
            for (const auto& v : d.values) {
                io::put_u16(out, static_cast<std::uint16_t>(v.size()));
                out.insert(out.end(), v.begin(), v.end());
            }
        }
        return out;
    }

private:
    static RelationSchema read_dims(const std::vector<std::uint8_t>& buf) {
        io::ByteReader r(buf);
        std::uint32_t ndims = r.u32();
        std::uint32_t measures = r.u32();
        std::vector<DimensionSpec> dims(ndims);
        for (auto& d : dims) {
            d.name.resize(r.u16());
            r.bytes(d.name.data(), d.name.size());
            d.values.resize(r.u32());
            for (auto& v : d.values) {
                v.resize(r.u16());
                r.bytes(v.data(), v.size());
            }
        }
        return RelationSchema(std::move(dims), measures);
    }

    void compute_sizes() {
        h_bytes_ = serialize_dhc(header_).size() + dims_bytes().size();
        c_bytes_ = cell_pages() * kPageSize;
    }

    RelationSchema schema_;
    DhcHeader header_;
    std::vector<double> measures_;  // n_cells * measure_count, physical order
    std::uint64_t cells_per_page_ = 0;
    std::uint64_t h_bytes_ = 0;
    std::uint64_t c_bytes_ = 0;
};

inline MultidimStore build_dhc(const Relation& rel, DscParams params) {
    DscHeader dsc = build_dsc(rel.sorted_logical_positions(), params);
    DhcHeader header = build_dhc_header(dsc);
    std::vector<double> measures;
    measures.reserve(rel.cell_count() * rel.schema().measure_count);
    for (const auto& [pos, ms] : rel.cells())
        measures.insert(measures.end(), ms.begin(), ms.end());
    return MultidimStore(rel.schema(), std::move(header), std::move(measures));
}

}  // namespace mdlab
