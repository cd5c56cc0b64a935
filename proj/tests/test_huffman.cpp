#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "mdlab/huffman.hpp"

using namespace mdlab;

namespace {

double kraft_sum(const CanonicalCode& code) {
    double sum = 0;
    for (const auto& e : code.entries()) sum += std::ldexp(1.0, -e.length);
    return sum;
}

double entropy(const SymbolFrequencyTable& freqs) {
    double total = 0;
    for (const auto& [_, c] : freqs) total += static_cast<double>(c);
    double h = 0;
    for (const auto& [_, c] : freqs) {
        double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

// Brute-force optimum over Kraft-feasible length vectors: sorted
// frequencies take non-decreasing lengths.
double brute_force_optimum(std::vector<std::uint64_t> counts) {
    std::sort(counts.rbegin(), counts.rend());
    const std::size_t k = counts.size();
    double best = 1e300;
    std::vector<int> lens(k, 1);
    // enumerate non-decreasing length vectors, lengths <= k
    std::function<void(std::size_t, int)> rec = [&](std::size_t idx, int min_len) {
        if (idx == k) {
            double kraft = 0;
            for (int l : lens) kraft += std::ldexp(1.0, -l);
            if (kraft > 1.0 + 1e-12) return;
            double cost = 0;
            for (std::size_t i = 0; i < k; ++i) cost += static_cast<double>(counts[i]) * lens[i];
            best = std::min(best, cost);
            return;
        }
        for (int l = min_len; l <= static_cast<int>(k); ++l) {
            lens[idx] = l;
            rec(idx + 1, l);
        }
    };
    rec(0, 1);
    double total = 0;
    for (auto c : counts) total += static_cast<double>(c);
    return best / total;
}

}  // namespace

TEST_CASE("build_code worked examples") {
    auto two = build_code({{0, 1}, {1, 1}});
    CHECK(two.length_of(0) == 1);
    CHECK(two.length_of(1) == 1);

    auto skew = build_code({{0, 5}, {1, 1}, {2, 1}});
    CHECK(skew.length_of(0) == 1);
    CHECK(skew.length_of(1) == 2);
    CHECK(skew.length_of(2) == 2);

    auto lone = build_code({{7, 7}});
    CHECK(lone.length_of(7) == 1);

    CHECK_THROWS_AS(build_code({}), EmptyAlphabet);
}

TEST_CASE("encode worked examples") {
    auto code = build_code({{0, 1}, {1, 1}});
    CHECK(encode(code, {}).bit_length == 0);

    auto bits = encode(code, {0, 1, 1});
    CHECK(bits.bit_length == 3);
    CHECK(bits.bytes.size() == 1);
    CHECK(bits.bytes[0] == 0x60);  // 011 MSB-first

    CHECK_THROWS_AS(encode(code, {2}), SymbolNotInCode);
}

TEST_CASE("encode/decode round-trip on random sequences") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        SymbolFrequencyTable freqs;
        int alphabet = 2 + static_cast<int>(rng() % 40);
        std::vector<std::uint32_t> seq;
        for (int i = 0; i < 20000; ++i) {
            // skewed draw
            std::uint32_t sym = static_cast<std::uint32_t>(
                std::min<double>(alphabet - 1,
                                 -std::log(std::uniform_real_distribution<>(1e-12, 1.0)(rng)) * 3));
            seq.push_back(sym);
        }
        for (auto s : seq) ++freqs[s];
        auto code = build_code(freqs);
        auto stream = encode(code, seq);
        auto [decoded, end_bit] = decode_prefix(code, stream, 0, seq.size());
        CHECK(decoded == seq);
        CHECK(end_bit == stream.bit_length);
    }
}

TEST_CASE("decode_prefix resumes one symbol at a time") {
    auto freqs = SymbolFrequencyTable{{1, 9}, {2, 3}, {3, 1}, {9, 1}};
    auto code = build_code(freqs);
    std::vector<std::uint32_t> seq{1, 1, 9, 2, 3, 1, 2, 1};
    auto stream = encode(code, seq);
    std::uint64_t bit = 0;
    std::vector<std::uint32_t> collected;
    while (bit < stream.bit_length) {
        auto [syms, next] = decode_prefix(code, stream, bit, 1);
        REQUIRE(syms.size() == 1);
        collected.push_back(syms[0]);
        bit = next;
    }
    CHECK(collected == seq);
}

TEST_CASE("truncated stream throws") {
    auto code = build_code({{0, 10}, {1, 3}, {2, 1}});
    auto stream = encode(code, {2});
    REQUIRE(stream.bit_length >= 2);
    stream.bit_length -= 1;  // cut mid-codeword
    std::uint64_t bit = 0;
    CHECK_THROWS_AS(code.decode_one(stream, bit), TruncatedStream);
}

TEST_CASE("expected_code_length") {
    auto two = build_code({{0, 1}, {1, 1}});
    CHECK(expected_code_length(two, {{0, 1}, {1, 1}}) == 1.0);

    SymbolFrequencyTable f{{0, 5}, {1, 1}, {2, 1}};
    CHECK(expected_code_length(build_code(f), f) == Catch::Approx(9.0 / 7.0));

    // dyadic distribution: expected length equals entropy exactly
    SymbolFrequencyTable dyadic{{0, 4}, {1, 2}, {2, 1}, {3, 1}};
    CHECK(expected_code_length(build_code(dyadic), dyadic) == Catch::Approx(entropy(dyadic)));
}

TEST_CASE("Kraft equality and prefix-freeness") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        SymbolFrequencyTable freqs;
        int alphabet = 2 + static_cast<int>(rng() % 30);
        for (int s = 0; s < alphabet; ++s) freqs[s] = 1 + rng() % 1000;
        auto code = build_code(freqs);
        CHECK(kraft_sum(code) == Catch::Approx(1.0).epsilon(1e-12));
        // canonical codes of the same length are consecutive integers, so
        // prefix-freeness reduces to: no codeword is a prefix of a longer one
        const auto& es = code.entries();
        for (std::size_t a = 0; a < es.size(); ++a)
            for (std::size_t b = a + 1; b < es.size(); ++b) {
                auto shorter = es[a], longer = es[b];
                if (shorter.length > longer.length) std::swap(shorter, longer);
                CHECK((longer.codeword >> (longer.length - shorter.length)) != shorter.codeword);
            }
    }
}

TEST_CASE("Shannon bounds on random tables") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        SymbolFrequencyTable freqs;
        int alphabet = 2 + static_cast<int>(rng() % 60);
        for (int s = 0; s < alphabet; ++s) freqs[s] = 1 + rng() % 5000;
        auto code = build_code(freqs);
        double len = expected_code_length(code, freqs);
        double h = entropy(freqs);
        CHECK(len >= h - 1e-9);
        CHECK(len < h + 1.0);
    }
}

TEST_CASE("optimality on small alphabets") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        int k = 2 + static_cast<int>(rng() % 5);
        SymbolFrequencyTable freqs;
        std::vector<std::uint64_t> counts;
        for (int s = 0; s < k; ++s) {
            std::uint64_t c = 1 + rng() % 8;
            freqs[s] = c;
            counts.push_back(c);
        }
        auto code = build_code(freqs);
        CHECK(expected_code_length(code, freqs) ==
              Catch::Approx(brute_force_optimum(counts)).epsilon(1e-12));
    }
}

TEST_CASE("code table serialization round-trip") {
    SymbolFrequencyTable freqs{{3, 100}, {17, 40}, {256, 7}, {70000, 1}, {0, 1000}};
    auto code = build_code(freqs);
    std::vector<std::uint8_t> buf;
    serialize_code(code, buf);
    io::ByteReader r(buf);
    auto back = deserialize_code(r);
    REQUIRE(back.symbol_count() == code.symbol_count());
    for (std::size_t i = 0; i < code.entries().size(); ++i) {
        CHECK(back.entries()[i].symbol == code.entries()[i].symbol);
        CHECK(back.entries()[i].length == code.entries()[i].length);
        CHECK(back.entries()[i].codeword == code.entries()[i].codeword);
    }
}
