#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "mdlab/error.hpp"
#include "mdlab/io_util.hpp"

namespace mdlab {

struct DscParams {
    std::uint8_t s = 16;  // bits per difference element: 8, 16 or 32

    DscParams() = default;
    explicit DscParams(std::uint8_t bits) : s(bits) {
        if (s != 8 && s != 16 && s != 32) throw FormatError("s must be 8, 16 or 32");
    }

    std::uint64_t dbar() const { return (std::uint64_t{1} << s) - 1; }
};

struct JumpRecord {
    std::uint64_t logical = 0;     // absolute logical position (a J_k value)
    std::uint64_t physical = 0;    // index of that cell in the compressed array
    std::uint64_t diff_index = 0;  // index of this jump's zero in the difference sequence
};

/// Jump sequence plus raw s-bit overflow difference sequence.
struct DscHeader {
    DscParams params;
    std::vector<std::uint32_t> differences;  // D_i, one per cell
    std::vector<JumpRecord> jumps;           // J_k, one per zero of D

    std::uint64_t n_cells() const { return differences.size(); }
};

inline DscHeader build_dsc(const std::vector<std::uint64_t>& positions, DscParams params) {
    if (positions.empty()) throw EmptyInput("empty position sequence");
    DscHeader h;
    h.params = params;
    h.differences.reserve(positions.size());
    const std::uint64_t dbar = params.dbar();
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (i > 0 && positions[i] <= positions[i - 1])
            throw NotStrictlyIncreasing("positions must be strictly increasing");
        std::uint64_t delta = i == 0 ? positions[0] : positions[i] - positions[i - 1];
        if (i > 0 && delta <= dbar) {
            h.differences.push_back(static_cast<std::uint32_t>(delta));
        } else {
            h.differences.push_back(0);
            h.jumps.push_back({positions[i], i, i});
        }
    }
    return h;
}

inline std::vector<std::uint64_t> reconstruct_all(const DscHeader& h) {
    if (h.differences.empty() || h.jumps.empty()) throw CorruptHeader("header has no cells");
    std::vector<std::uint64_t> out;
    out.reserve(h.differences.size());
    std::size_t jump = 0;
    std::uint64_t pos = 0;
    for (std::size_t i = 0; i < h.differences.size(); ++i) {
        if (h.differences[i] == 0) {
            if (jump >= h.jumps.size() || h.jumps[jump].diff_index != i ||
                h.jumps[jump].physical != i)
                throw CorruptHeader("jump/zero correspondence violated");
            pos = h.jumps[jump].logical;
            ++jump;
        } else {
            if (i == 0) throw CorruptHeader("D_0 must be zero");
            pos += h.differences[i];
        }
        if (i > 0 && pos <= out.back()) throw CorruptHeader("reconstructed sequence not increasing");
        out.push_back(pos);
    }
    if (jump != h.jumps.size()) throw CorruptHeader("unused jump records");
    return out;
}

/// Locates the physical index of a logical position, decoding only the
/// one jump segment that can contain it. `decoded` (optional) counts the
/// difference elements accumulated.
inline std::optional<std::uint64_t> dsc_search(const DscHeader& h, std::uint64_t target,
                                               std::uint64_t* decoded = nullptr) {
    if (decoded) *decoded = 0;
    // greatest jump with logical <= target
    auto it = std::upper_bound(h.jumps.begin(), h.jumps.end(), target,
                               [](std::uint64_t t, const JumpRecord& j) { return t < j.logical; });
    if (it == h.jumps.begin()) return std::nullopt;
    --it;
    if (it->logical == target) return it->physical;
    std::uint64_t pos = it->logical;
    std::uint64_t phys = it->physical;
    for (std::size_t i = it->diff_index + 1; i < h.differences.size(); ++i) {
        std::uint32_t d = h.differences[i];
        if (d == 0) return std::nullopt;  // next segment starts past here
        if (decoded) ++*decoded;
        pos += d;
        ++phys;
        if (pos == target) return phys;
        if (pos > target) return std::nullopt;
    }
    return std::nullopt;
}

inline constexpr std::size_t kDscFileHeaderBytes = 32;
inline constexpr std::size_t kJumpRecordBytes = 24;

inline std::uint64_t dsc_header_size_bytes(const DscHeader& h) {
    std::uint64_t diff_bytes = (h.n_cells() * h.params.s + 7) / 8;
    return kDscFileHeaderBytes + h.jumps.size() * kJumpRecordBytes + diff_bytes;
}

// File layout: "DSC1", version, s, N, K, reserved padding to 32 bytes,
// K jump records (logical, physical, diff_index; 8B LE each), then the
// differences packed as s-bit LE integers.
inline std::vector<std::uint8_t> serialize_dsc(const DscHeader& h) {
    std::vector<std::uint8_t> out;
    out.reserve(dsc_header_size_bytes(h));
    out.insert(out.end(), {'D', 'S', 'C', '1'});
    io::put_u8(out, 1);
    io::put_u8(out, h.params.s);
    io::put_u64(out, h.n_cells());
    io::put_u64(out, h.jumps.size());
    out.resize(kDscFileHeaderBytes, 0);
    for (const auto& j : h.jumps) {
        io::put_u64(out, j.logical);
        io::put_u64(out, j.physical);
        io::put_u64(out, j.diff_index);
    }
    for (std::uint32_t d : h.differences) {
        for (std::uint8_t b = 0; b < h.params.s; b += 8)
            io::put_u8(out, static_cast<std::uint8_t>(d >> b));
    }
    return out;
}

inline DscHeader deserialize_dsc(const std::vector<std::uint8_t>& buf) {
    io::ByteReader r(buf);
    char magic[4];
    r.bytes(magic, 4);
    if (std::string(magic, 4) != "DSC1") throw FormatError("bad DSC magic");
    if (r.u8() != 1) throw FormatError("unsupported DSC version");
    DscHeader h;
    h.params = DscParams(r.u8());
    std::uint64_t n = r.u64();
    std::uint64_t k = r.u64();
    // skip reserved padding
    while (r.pos() < kDscFileHeaderBytes) r.u8();
    h.jumps.resize(k);
    for (auto& j : h.jumps) {
        j.logical = r.u64();
        j.physical = r.u64();
        j.diff_index = r.u64();
    }
    h.differences.resize(n);
    for (auto& d : h.differences) {
        std::uint32_t v = 0;
        for (std::uint8_t b = 0; b < h.params.s; b += 8)
            v |= static_cast<std::uint32_t>(r.u8()) << b;
        d = v;
    }
    return h;
}

}  // namespace mdlab
