#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <queue>
#include <vector>

#include "mdlab/error.hpp"
#include "mdlab/io_util.hpp"

namespace mdlab {

using SymbolFrequencyTable = std::map<std::uint32_t, std::uint64_t>;

struct BitStream {
    std::vector<std::uint8_t> bytes;
    std::uint64_t bit_length = 0;

    void append_bit(bool bit) {
        if (bit_length % 8 == 0) bytes.push_back(0);
        if (bit) bytes.back() |= static_cast<std::uint8_t>(1u << (7 - bit_length % 8));
        ++bit_length;
    }

    bool bit(std::uint64_t i) const {
        return (bytes[i / 8] >> (7 - i % 8)) & 1u;
    }
};

/// Canonical Huffman code: codewords are determined entirely by the
/// per-symbol lengths, assigned in (length, symbol) order.
class CanonicalCode {
public:
    struct Entry {
        std::uint32_t symbol;
        std::uint8_t length;
        std::uint64_t codeword;  // MSB-aligned within `length` bits
    };

    static CanonicalCode from_lengths(std::vector<std::pair<std::uint32_t, std::uint8_t>> lengths) {
        if (lengths.empty()) throw EmptyAlphabet("no symbols");
        std::sort(lengths.begin(), lengths.end(),
                  [](const auto& a, const auto& b) {
                      return a.second != b.second ? a.second < b.second : a.first < b.first;
                  });
        CanonicalCode code;
        std::uint64_t next = 0;
        std::uint8_t prev_len = lengths.front().second;
        for (const auto& [sym, len] : lengths) {
            next <<= (len - prev_len);
            code.entries_.push_back({sym, len, next});
            code.by_symbol_[sym] = code.entries_.size() - 1;
            ++next;
            prev_len = len;
        }
        code.build_decode_tables();
        return code;
    }

    std::size_t symbol_count() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    std::uint8_t length_of(std::uint32_t symbol) const {
        auto it = by_symbol_.find(symbol);
        if (it == by_symbol_.end()) throw SymbolNotInCode("symbol not in code");
        return entries_[it->second].length;
    }

    void append_codeword(BitStream& out, std::uint32_t symbol) const {
        auto it = by_symbol_.find(symbol);
        if (it == by_symbol_.end()) throw SymbolNotInCode("symbol not in code");
        const Entry& e = entries_[it->second];
        for (std::uint8_t b = e.length; b-- > 0;) out.append_bit((e.codeword >> b) & 1u);
    }

    /// Decodes one symbol starting at `bit`; advances `bit` past it.
    std::uint32_t decode_one(const BitStream& stream, std::uint64_t& bit) const {
        std::uint64_t code = 0;
        std::uint8_t len = 0;
        while (true) {
            if (bit >= stream.bit_length) throw TruncatedStream("bitstream exhausted mid-codeword");
            code = (code << 1) | static_cast<std::uint64_t>(stream.bit(bit));
            ++bit;
            ++len;
            if (len > max_length_) throw TruncatedStream("invalid codeword");
            const auto& lt = lengths_[len];
            if (lt.count > 0 && code >= lt.first_code && code < lt.first_code + lt.count)
                return entries_[lt.entry_offset + (code - lt.first_code)].symbol;
        }
    }

private:
    void build_decode_tables() {
        max_length_ = entries_.back().length;
        lengths_.assign(max_length_ + 1, {});
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            auto& lt = lengths_[entries_[i].length];
            if (lt.count == 0) {
                lt.first_code = entries_[i].codeword;
                lt.entry_offset = static_cast<std::uint32_t>(i);
            }
            ++lt.count;
        }
    }

    struct LengthTable {
        std::uint64_t first_code = 0;
        std::uint32_t count = 0;
        std::uint32_t entry_offset = 0;
    };

    std::vector<Entry> entries_;               // sorted by (length, symbol)
    std::map<std::uint32_t, std::size_t> by_symbol_;
    std::vector<LengthTable> lengths_;
    std::uint8_t max_length_ = 0;
};

/// Huffman code lengths with deterministic tie-breaking: always merge the
/// two lowest weights, ties resolved toward the node containing the
/// smaller earliest symbol. A one-symbol alphabet gets length 1 so that
/// the stream stays decodable.
inline CanonicalCode build_code(const SymbolFrequencyTable& freqs) {
    if (freqs.empty()) throw EmptyAlphabet("empty frequency table");
    if (freqs.size() == 1)
        return CanonicalCode::from_lengths({{freqs.begin()->first, 1}});

    struct Node {
        std::uint64_t weight;
        std::uint32_t earliest;  // smallest symbol in the subtree
        int left = -1, right = -1;
        std::uint32_t symbol = 0;
    };
    std::vector<Node> nodes;
    nodes.reserve(freqs.size() * 2);
    using QItem = std::pair<std::pair<std::uint64_t, std::uint32_t>, int>;
    std::priority_queue<QItem, std::vector<QItem>, std::greater<>> q;
    for (const auto& [sym, count] : freqs) {
        if (count == 0) throw EmptyAlphabet("zero frequency");
        nodes.push_back({count, sym, -1, -1, sym});
        q.push({{count, sym}, static_cast<int>(nodes.size() - 1)});
    }
    while (q.size() > 1) {
        auto a = q.top(); q.pop();
        auto b = q.top(); q.pop();
        Node merged{a.first.first + b.first.first,
                    std::min(a.first.second, b.first.second), a.second, b.second, 0};
        nodes.push_back(merged);
        q.push({{merged.weight, merged.earliest}, static_cast<int>(nodes.size() - 1)});
    }

    std::vector<std::pair<std::uint32_t, std::uint8_t>> lengths;
    std::vector<std::pair<int, std::uint8_t>> stack{{q.top().second, 0}};
    while (!stack.empty()) {
        auto [idx, depth] = stack.back();
        stack.pop_back();
        const Node& n = nodes[idx];
        if (n.left < 0) {
            lengths.push_back({n.symbol, depth});
        } else {
            stack.push_back({n.left, static_cast<std::uint8_t>(depth + 1)});
            stack.push_back({n.right, static_cast<std::uint8_t>(depth + 1)});
        }
    }
    return CanonicalCode::from_lengths(std::move(lengths));
}

inline BitStream encode(const CanonicalCode& code, const std::vector<std::uint32_t>& symbols) {
    BitStream out;
    for (std::uint32_t s : symbols) code.append_codeword(out, s);
    return out;
}

/// Decodes up to `max_symbols` starting at `start_bit`; returns the
/// symbols and the bit offset just past the last decoded codeword.
inline std::pair<std::vector<std::uint32_t>, std::uint64_t> decode_prefix(
    const CanonicalCode& code, const BitStream& stream, std::uint64_t start_bit,
    std::uint64_t max_symbols) {
    std::vector<std::uint32_t> out;
    std::uint64_t bit = start_bit;
    while (out.size() < max_symbols && bit < stream.bit_length)
        out.push_back(code.decode_one(stream, bit));
    return {std::move(out), bit};
}

inline double expected_code_length(const CanonicalCode& code, const SymbolFrequencyTable& freqs) {
    double total = 0, weighted = 0;
    for (const auto& [sym, count] : freqs) {
        total += static_cast<double>(count);
        weighted += static_cast<double>(count) * code.length_of(sym);
    }
    return weighted / total;
}

// Code table wire format: symbol count (4B LE), then (symbol 4B LE,
// length 1B) pairs in (length, symbol) order.
inline void serialize_code(const CanonicalCode& code, std::vector<std::uint8_t>& out) {
    io::put_u32(out, static_cast<std::uint32_t>(code.symbol_count()));
    for (const auto& e : code.entries()) {
        io::put_u32(out, e.symbol);
        io::put_u8(out, e.length);
    }
}

inline CanonicalCode deserialize_code(io::ByteReader& r) {
    std::uint32_t n = r.u32();
    if (n == 0) throw FormatError("empty code table");
    std::vector<std::pair<std::uint32_t, std::uint8_t>> lengths;
    lengths.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint32_t sym = r.u32();
        std::uint8_t len = r.u8();
        lengths.push_back({sym, len});
    }
    return CanonicalCode::from_lengths(std::move(lengths));
}

}  // namespace mdlab
