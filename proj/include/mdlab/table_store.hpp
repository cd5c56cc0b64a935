#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <vector>

#include "mdlab/error.hpp"
#include "mdlab/io_util.hpp"
#include "mdlab/page_cache.hpp"
#include "mdlab/relation.hpp"

namespace mdlab {

inline constexpr std::uint32_t kHeapFileId = 1;
inline constexpr std::uint32_t kIndexFileId = 2;

/// Page counts per level: level 1 is the root, level L-1 the leaves,
/// level L the heap.
struct LevelProfile {
    std::vector<std::uint64_t> pages;  // N_1 .. N_L

    std::size_t level_count() const { return pages.size(); }
    std::uint64_t total_pages() const {
        std::uint64_t n = 0;
        for (auto p : pages) n += p;
        return n;
    }
    std::uint64_t max_level_pages() const {
        std::uint64_t m = 0;
        for (auto p : pages) m = std::max(m, p);
        return m;
    }
};

/// Heap file of fixed-width rows plus a bulk-loaded B-tree on the full
/// composite key. Read-only after build; all page access is countable.
class TableStore {
public:
    static TableStore build(const Relation& rel) {
        if (rel.cell_count() == 0) throw EmptyRelation("cannot build table from empty relation");
        TableStore t;
        t.schema_ = rel.schema();
        t.init_geometry();
        t.load(rel);
        return t;
    }

    const RelationSchema& schema() const { return schema_; }
    std::uint64_t row_count() const { return n_rows_; }
    std::uint64_t row_width() const { return row_width_; }
    std::uint64_t rows_per_page() const { return rows_per_page_; }

    /// Root-to-leaf descent, then one heap page read for present keys.
    std::optional<std::vector<double>> lookup(const CompositeKey& key,
                                              PageCache* cache = nullptr) const {
        linearize(schema_, key);  // range validation
        const std::size_t d = schema_.dimension_count();
        std::uint64_t page = root_page_;
        std::size_t index_levels = level_counts_.size();  // = L - 1
        for (std::size_t depth = 0; depth + 1 < index_levels; ++depth) {
            if (cache) cache->access({kIndexFileId, page});
            page = descend(page, key, d);
        }
        if (cache) cache->access({kIndexFileId, page});
        auto hit = leaf_find(page, key, d);
        if (!hit) return std::nullopt;
        auto [heap_page, slot] = *hit;
        if (cache) cache->access({kHeapFileId, heap_page});
        const std::uint8_t* row =
            heap_.data() + heap_page * kPageSize + slot * row_width_ + d * 4;
        std::vector<double> measures(schema_.measure_count);
        std::memcpy(measures.data(), row, schema_.measure_count * 8);
        return measures;
    }

    /// All leaf keys in storage order (for order-invariant checks).
    std::vector<CompositeKey> leaf_keys_in_order() const {
        const std::size_t d = schema_.dimension_count();
        std::vector<CompositeKey> keys;
        keys.reserve(n_rows_);
        std::uint64_t leaves = level_counts_.back();
        for (std::uint64_t p = leaf_start_page_; p < leaf_start_page_ + leaves; ++p) {
            const std::uint8_t* page = index_.data() + p * kPageSize;
            std::uint16_t count;
            std::memcpy(&count, page, 2);
            for (std::uint16_t e = 0; e < count; ++e) {
                const std::uint8_t* entry = page + 2 + e * leaf_entry_width_;
                CompositeKey key(d);
                for (std::size_t c = 0; c < d; ++c) key[c] = key_comp(entry, c);
                keys.push_back(std::move(key));
            }
        }
        return keys;
    }

    LevelProfile level_profile() const {
        LevelProfile p;
        for (auto c : level_counts_) p.pages.push_back(c);
        p.pages.push_back(heap_pages_);
        return p;
    }

    std::uint64_t heap_bytes() const { return heap_.size(); }
    std::uint64_t index_bytes() const { return index_.size() + kPageSize; }  // + metadata page
    std::uint64_t total_bytes() const { return heap_bytes() + index_bytes(); }

    void write(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        io::write_file(dir / "table.bin", heap_);
        std::vector<std::uint8_t> idx;
        idx.insert(idx.end(), {'B', 'T', 'R', '1'});
        io::put_u8(idx, 1);
        io::put_u32(idx, static_cast<std::uint32_t>(schema_.dimension_count()));
        io::put_u32(idx, schema_.measure_count);
        io::put_u32(idx, static_cast<std::uint32_t>(level_counts_.size() + 1));  // L
        io::put_u32(idx, leaf_fanout_);
        io::put_u32(idx, internal_fanout_);
        io::put_u64(idx, n_rows_);
        io::put_u32(idx, static_cast<std::uint32_t>(level_counts_.size()));
        for (auto c : level_counts_) io::put_u32(idx, static_cast<std::uint32_t>(c));
        idx.resize(kPageSize, 0);
        idx.insert(idx.end(), index_.begin(), index_.end());
        io::write_file(dir / "index.btree", idx);
        io::write_file(dir / "dims.tbl", dims_text());
    }

private:
    TableStore() = default;

    void init_geometry() {
        const std::uint64_t d = schema_.dimension_count();
        row_width_ = d * 4 + schema_.measure_count * 8ull;
        rows_per_page_ = kPageSize / row_width_;
        if (rows_per_page_ == 0) throw FormatError("row wider than a page");
        key_width_ = d * 4;
        leaf_entry_width_ = key_width_ + 4 + 2;
        leaf_fanout_ = static_cast<std::uint32_t>((kPageSize - 2) / leaf_entry_width_);
        internal_fanout_ =
            static_cast<std::uint32_t>((kPageSize - 2 + key_width_) / (key_width_ + 4));
        if (internal_fanout_ < 2) throw FormatError("key too wide for internal node");
    }

    void load(const Relation& rel) {
        const std::size_t d = schema_.dimension_count();
        n_rows_ = rel.cell_count();
        heap_pages_ = (n_rows_ + rows_per_page_ - 1) / rows_per_page_;
        heap_.assign(heap_pages_ * kPageSize, 0);

        // Rows in key order (the cell map iterates by logical position,
        // which is exactly lexicographic key order under row-major
        // linearization), so the heap is clustered by key.
        std::vector<CompositeKey> keys;
        keys.reserve(n_rows_);
        std::uint64_t row = 0;
        for (const auto& [pos, measures] : rel.cells()) {
            CompositeKey key = delinearize(schema_, pos);
            std::uint8_t* p = heap_.data() + (row / rows_per_page_) * kPageSize +
                              (row % rows_per_page_) * row_width_;
            for (std::size_t i = 0; i < d; ++i) {
                std::uint32_t v = key[i];
                std::memcpy(p + i * 4, &v, 4);
            }
            std::memcpy(p + d * 4, measures.data(), schema_.measure_count * 8);
            keys.push_back(std::move(key));
            ++row;
        }

        // Bottom-up bulk load at 100% fill (rightmost nodes may be short).
        struct Node {
            CompositeKey first_key;
            std::vector<std::uint8_t> body;  // serialized page
        };
        std::vector<std::vector<Node>> levels;  // bottom-up: [0] = leaves

        std::vector<Node> leaves;
        for (std::uint64_t first = 0; first < n_rows_; first += leaf_fanout_) {
            std::uint64_t count = std::min<std::uint64_t>(leaf_fanout_, n_rows_ - first);
            Node node;
            node.first_key = keys[first];
            io::put_u16(node.body, static_cast<std::uint16_t>(count));
            for (std::uint64_t i = first; i < first + count; ++i) {
                for (std::size_t c = 0; c < d; ++c) io::put_u32(node.body, keys[i][c]);
                io::put_u32(node.body, static_cast<std::uint32_t>(i / rows_per_page_));
                io::put_u16(node.body, static_cast<std::uint16_t>(i % rows_per_page_));
            }
            leaves.push_back(std::move(node));
        }
        levels.push_back(std::move(leaves));

        while (levels.back().size() > 1) {
            const auto& below = levels.back();
            std::vector<Node> level;
            for (std::size_t first = 0; first < below.size(); first += internal_fanout_) {
                std::size_t count = std::min<std::size_t>(internal_fanout_, below.size() - first);
                Node node;
                node.first_key = below[first].first_key;
                io::put_u16(node.body, static_cast<std::uint16_t>(count));
                for (std::size_t i = first + 1; i < first + count; ++i)
                    for (std::size_t c = 0; c < d; ++c) io::put_u32(node.body, below[i].first_key[c]);
                node.body.resize(2 + (count - 1) * key_width_ + count * 4);  // child slots
                level.push_back(std::move(node));
            }
            levels.push_back(std::move(level));
        }

        // Assign page ids top-down and patch child pointers.
        level_counts_.clear();
        std::vector<std::uint64_t> level_start(levels.size());
        std::uint64_t next_page = 0;
        for (std::size_t k = levels.size(); k-- > 0;) {  // top-down
            level_start[k] = next_page;
            next_page += levels[k].size();
            level_counts_.push_back(levels[k].size());
        }
        root_page_ = level_start[levels.size() - 1];
        leaf_start_page_ = level_start[0];

        index_.assign(next_page * kPageSize, 0);
        for (std::size_t k = 0; k < levels.size(); ++k) {
            for (std::size_t n = 0; n < levels[k].size(); ++n) {
                auto& node = levels[k][n];
                if (k > 0) {
                    // fill child page ids: children are consecutive below
                    std::uint16_t count;
                    std::memcpy(&count, node.body.data(), 2);
                    std::size_t child_off = 2 + (count - 1) * key_width_;
                    std::size_t first_child = 0;
                    for (std::size_t m = 0; m < n; ++m) {
                        std::uint16_t c;
                        std::memcpy(&c, levels[k][m].body.data(), 2);
                        first_child += c;
                    }
                    for (std::uint16_t c = 0; c < count; ++c) {
                        std::uint32_t child_page =
                            static_cast<std::uint32_t>(level_start[k - 1] + first_child + c);
                        std::memcpy(node.body.data() + child_off + c * 4, &child_page, 4);
                    }
                }
                std::memcpy(index_.data() + (level_start[k] + n) * kPageSize, node.body.data(),
                            node.body.size());
            }
        }
    }

    // Reads component c of the key stored at `p`.
    static std::uint32_t key_comp(const std::uint8_t* p, std::size_t c) {
        std::uint32_t v;
        std::memcpy(&v, p + c * 4, 4);
        return v;
    }

    // key < stored?
    static int compare_key(const CompositeKey& key, const std::uint8_t* stored, std::size_t d) {
        for (std::size_t c = 0; c < d; ++c) {
            std::uint32_t s = key_comp(stored, c);
            if (key[c] < s) return -1;
            if (key[c] > s) return 1;
        }
        return 0;
    }

    std::uint64_t descend(std::uint64_t page, const CompositeKey& key, std::size_t d) const {
        const std::uint8_t* p = index_.data() + page * kPageSize;
        std::uint16_t count;
        std::memcpy(&count, p, 2);
        const std::uint8_t* seps = p + 2;
        // first separator strictly greater than key bounds the child
        std::size_t lo = 0, hi = count - 1;  // count-1 separators
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (compare_key(key, seps + mid * key_width_, d) < 0)
                hi = mid;
            else
                lo = mid + 1;
        }
        const std::uint8_t* children = seps + (count - 1) * key_width_;
        std::uint32_t child;
        std::memcpy(&child, children + lo * 4, 4);
        return child;
    }

    std::optional<std::pair<std::uint64_t, std::uint16_t>> leaf_find(std::uint64_t page,
                                                                     const CompositeKey& key,
                                                                     std::size_t d) const {
        const std::uint8_t* p = index_.data() + page * kPageSize;
        std::uint16_t count;
        std::memcpy(&count, p, 2);
        const std::uint8_t* entries = p + 2;
        std::size_t lo = 0, hi = count;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            int cmp = compare_key(key, entries + mid * leaf_entry_width_, d);
            if (cmp == 0) {
                const std::uint8_t* e = entries + mid * leaf_entry_width_ + key_width_;
                std::uint32_t heap_page;
                std::uint16_t slot;
                std::memcpy(&heap_page, e, 4);
                std::memcpy(&slot, e + 4, 2);
                return std::make_pair(static_cast<std::uint64_t>(heap_page), slot);
            }
            if (cmp < 0)
                hi = mid;
            else
                lo = mid + 1;
        }
        return std::nullopt;
    }

    std::vector<std::uint8_t> dims_text() const {
        std::vector<std::uint8_t> out;
        std::string s = "cards=";
        auto cards = schema_.cardinalities();
        for (std::size_t i = 0; i < cards.size(); ++i)
            s += (i ? "," : "") + std::to_string(cards[i]);
        s += " measures=" + std::to_string(schema_.measure_count) + "\n";
        out.assign(s.begin(), s.end());
        return out;
    }

    RelationSchema schema_;
    std::uint64_t n_rows_ = 0;
    std::uint64_t row_width_ = 0;
    std::uint64_t rows_per_page_ = 0;
    std::uint64_t key_width_ = 0;
    std::uint64_t leaf_entry_width_ = 0;
    std::uint32_t leaf_fanout_ = 0;
    std::uint32_t internal_fanout_ = 0;
    std::uint64_t heap_pages_ = 0;
    std::uint64_t root_page_ = 0;
    std::uint64_t leaf_start_page_ = 0;
    std::vector<std::uint64_t> level_counts_;  // top-down: N_1 .. N_{L-1}
    std::vector<std::uint8_t> heap_;
    std::vector<std::uint8_t> index_;  // pages after the metadata page
};

}  // namespace mdlab
