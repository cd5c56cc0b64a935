#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mdlab/error.hpp"

namespace mdlab {

using CompositeKey = std::vector<std::uint32_t>;

/// One dimension of the star schema: an ordered list of distinct value
/// labels; the surrogate of a value is its index in this list.
struct DimensionSpec {
    std::string name;
    std::vector<std::string> values;

    std::uint32_t cardinality() const { return static_cast<std::uint32_t>(values.size()); }

    const std::string& value_at(std::uint32_t index) const {
        if (index >= values.size()) throw KeyOutOfRange("value index out of range");
        return values[index];
    }

    std::uint32_t index_of(const std::string& value) const {
        for (std::uint32_t i = 0; i < values.size(); ++i)
            if (values[i] == value) return i;
        throw KeyOutOfRange("unknown dimension value: " + value);
    }

    // Synthetic dimension with labels "v0".."v{card-1}".
    static DimensionSpec synthetic(std::string name, std::uint32_t cardinality) {
        DimensionSpec d;
        d.name = std::move(name);
        d.values.reserve(cardinality);
        for (std::uint32_t i = 0; i < cardinality; ++i) d.values.push_back("v" + std::to_string(i));
        return d;
    }
};

struct RelationSchema {
    std::vector<DimensionSpec> dimensions;
    std::uint32_t measure_count = 1;

    RelationSchema() = default;

    RelationSchema(std::vector<DimensionSpec> dims, std::uint32_t measures)
        : dimensions(std::move(dims)), measure_count(measures) {
        validate();
    }

    static RelationSchema from_cardinalities(const std::vector<std::uint32_t>& cards,
                                             std::uint32_t measures) {
        // reject oversized spaces before materializing any value labels
        std::uint64_t space = 1;
        for (std::uint32_t card : cards) {
            if (card == 0) throw SchemaOverflow("dimension cardinality must be >= 1");
            if (space > UINT64_MAX / card) throw SchemaOverflow("total space exceeds 64-bit range");
            space *= card;
        }
        std::vector<DimensionSpec> dims;
        dims.reserve(cards.size());
        for (std::size_t d = 0; d < cards.size(); ++d)
            dims.push_back(DimensionSpec::synthetic("dim" + std::to_string(d), cards[d]));
        return RelationSchema(std::move(dims), measures);
    }

    std::size_t dimension_count() const { return dimensions.size(); }

    std::vector<std::uint32_t> cardinalities() const {
        std::vector<std::uint32_t> c;
        c.reserve(dimensions.size());
        for (const auto& d : dimensions) c.push_back(d.cardinality());
        return c;
    }

    // Product of the cardinalities; the size of the virtual array.
    std::uint64_t total_space() const { return total_space_; }

    void validate() {
        if (dimensions.empty()) throw SchemaOverflow("schema needs at least one dimension");
        std::uint64_t space = 1;
        for (const auto& d : dimensions) {
            if (d.cardinality() == 0) throw SchemaOverflow("dimension cardinality must be >= 1");
            std::uint64_t card = d.cardinality();
            if (space > UINT64_MAX / card)
                throw SchemaOverflow("total space exceeds 64-bit range");
            space *= card;
        }
        total_space_ = space;
    }

private:
    std::uint64_t total_space_ = 0;
};

// Row-major mixed-radix value of a composite key.
inline std::uint64_t linearize(const RelationSchema& schema, const CompositeKey& key) {
    if (key.size() != schema.dimension_count())
        throw KeyOutOfRange("key arity mismatch");
    std::uint64_t pos = 0;
    for (std::size_t d = 0; d < key.size(); ++d) {
        std::uint32_t card = schema.dimensions[d].cardinality();
        if (key[d] >= card) throw KeyOutOfRange("key component out of range");
        pos = pos * card + key[d];
    }
    return pos;
}

inline CompositeKey delinearize(const RelationSchema& schema, std::uint64_t pos) {
    if (pos >= schema.total_space()) throw PositionOutOfRange("logical position out of range");
    CompositeKey key(schema.dimension_count());
    for (std::size_t d = schema.dimension_count(); d-- > 0;) {
        std::uint32_t card = schema.dimensions[d].cardinality();
        key[d] = static_cast<std::uint32_t>(pos % card);
        pos /= card;
    }
    return key;
}

/// Sparse relation: nonempty cells only, keyed by logical position.
class Relation {
public:
    explicit Relation(RelationSchema schema) : schema_(std::move(schema)) {}

    const RelationSchema& schema() const { return schema_; }

    void set_cell(const CompositeKey& key, std::vector<double> measures) {
        if (measures.size() != schema_.measure_count)
            throw FormatError("measure arity mismatch");
        cells_[linearize(schema_, key)] = std::move(measures);
    }

    const std::vector<double>* find(const CompositeKey& key) const {
        auto it = cells_.find(linearize(schema_, key));
        return it == cells_.end() ? nullptr : &it->second;
    }

    std::size_t cell_count() const { return cells_.size(); }

    // Ascending by construction (ordered map on logical position).
    std::vector<std::uint64_t> sorted_logical_positions() const {
        if (cells_.empty()) throw EmptyRelation("relation has no cells");
        std::vector<std::uint64_t> out;
        out.reserve(cells_.size());
        for (const auto& [pos, _] : cells_) out.push_back(pos);
        return out;
    }

    const std::map<std::uint64_t, std::vector<double>>& cells() const { return cells_; }

private:
    RelationSchema schema_;
    std::map<std::uint64_t, std::vector<double>> cells_;
};

/// Synthetic star-schema relation. `skew` in [0, 1) controls clustering:
/// 0 scatters cells uniformly, values near 1 produce long runs of
/// consecutive logical positions so the difference sequence piles up at 1.
inline Relation generate_synthetic(std::uint64_t seed,
                                   const std::vector<std::uint32_t>& cards,
                                   double density, double skew,
                                   std::uint32_t measure_count = 1) {
    if (!(density > 0.0) || density > 1.0) throw InvalidDensity("density must be in (0, 1]");
    if (skew < 0.0 || skew >= 1.0) throw InvalidDensity("skew must be in [0, 1)");
    RelationSchema schema = RelationSchema::from_cardinalities(cards, measure_count);
    const std::uint64_t space = schema.total_space();
    const auto target = static_cast<std::uint64_t>(std::llround(density * static_cast<double>(space)));
    if (target < 1) throw InvalidDensity("density * total_space < 1");

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint64_t> pick(0, space - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);

    std::map<std::uint64_t, std::vector<double>> picked;
    std::uint64_t last = pick(rng);
    while (picked.size() < target) {
        std::uint64_t pos;
        if (!picked.empty() && coin(rng) < skew && last + 1 < space &&
            !picked.count(last + 1)) {
            pos = last + 1;  // extend the current run
        } else {
            pos = pick(rng);
            while (picked.count(pos)) pos = pick(rng);
        }
        std::vector<double> measures(measure_count);
        for (auto& m : measures) m = coin(rng) * 1000.0;
        picked.emplace(pos, std::move(measures));
        last = pos;
    }

    Relation rel(schema);
    for (auto& [pos, measures] : picked)
        rel.set_cell(delinearize(schema, pos), std::move(measures));
    return rel;
}

// --- Text interchange format -------------------------------------------
//
// Line 1:  cards=c1,c2,...  measures=m
// Then one line per cell: the dimension surrogates followed by the
// measures, comma separated.

inline void write_relation(const Relation& rel, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << "cards=";
    auto cards = rel.schema().cardinalities();
    for (std::size_t i = 0; i < cards.size(); ++i) f << (i ? "," : "") << cards[i];
    f << " measures=" << rel.schema().measure_count << "\n";
    char buf[64];
    for (const auto& [pos, measures] : rel.cells()) {
        CompositeKey key = delinearize(rel.schema(), pos);
        for (std::size_t i = 0; i < key.size(); ++i) f << (i ? "," : "") << key[i];
        for (double m : measures) {
            std::snprintf(buf, sizeof buf, "%.17g", m);
            f << ',' << buf;
        }
        f << "\n";
    }
    if (!f) throw IoError("write failed: " + path.string());
}

inline Relation read_relation(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(f, line)) throw FormatError("missing relation header line");

    std::vector<std::uint32_t> cards;
    std::uint32_t measures = 0;
    {
        std::istringstream hs(line);
        std::string tok;
        while (hs >> tok) {
            if (tok.rfind("cards=", 0) == 0) {
                std::istringstream cs(tok.substr(6));
                std::string c;
                while (std::getline(cs, c, ',')) cards.push_back(static_cast<std::uint32_t>(std::stoul(c)));
            } else if (tok.rfind("measures=", 0) == 0) {
                measures = static_cast<std::uint32_t>(std::stoul(tok.substr(9)));
            }
        }
    }
    if (cards.empty() || measures == 0) throw FormatError("bad relation header: " + line);

    Relation rel(RelationSchema::from_cardinalities(cards, measures));
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        CompositeKey key;
        std::vector<double> ms;
        std::size_t field = 0;
        while (std::getline(ls, tok, ',')) {
            if (field < cards.size())
                key.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
            else
                ms.push_back(std::stod(tok));
            ++field;
        }
        if (key.size() != cards.size() || ms.size() != measures)
            throw FormatError("bad relation row: " + line);
        rel.set_cell(key, std::move(ms));
    }
    return rel;
}

}  // namespace mdlab
