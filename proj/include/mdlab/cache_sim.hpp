#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <vector>

#include "mdlab/cache_model.hpp"
#include "mdlab/dhc_store.hpp"
#include "mdlab/page_cache.hpp"
#include "mdlab/table_store.hpp"

namespace mdlab {

/// Uniform page-access process: one draw per population per access.
/// A single population models the compressed array; one population per
/// level models the table representation.
struct AccessModel {
    std::vector<std::uint64_t> populations;  // page count per independent draw
    std::uint64_t seed = 1;

    static AccessModel single(std::uint64_t pages, std::uint64_t seed = 1) {
        return {{pages}, seed};
    }
    static AccessModel leveled(std::vector<std::uint64_t> levels, std::uint64_t seed = 1) {
        return {std::move(levels), seed};
    }
};

struct SimRecord {
    std::uint64_t access = 0;    // 1-based access index
    std::uint64_t fetched = 0;   // pages copied in by this access
    std::uint64_t resident = 0;  // cache occupancy afterwards
};

struct SimTrace {
    std::vector<SimRecord> records;
};

inline SimTrace simulate(const AccessModel& model, PageCache& cache, std::uint64_t accesses) {
    std::mt19937_64 rng(model.seed);
    SimTrace trace;
    trace.records.reserve(accesses);
    for (std::uint64_t i = 1; i <= accesses; ++i) {
        std::uint64_t before = cache.fetches();
        for (std::size_t level = 0; level < model.populations.size(); ++level) {
            std::uniform_int_distribution<std::uint64_t> pick(0, model.populations[level] - 1);
            cache.access({static_cast<std::uint32_t>(level), pick(rng)});
        }
        trace.records.push_back({i, cache.fetches() - before, cache.resident_count()});
    }
    return trace;
}

/// Replays `keys` against a store; every page touch of the lookups goes
/// through `cache`.
template <typename Store>
SimTrace run_store_workload(const Store& store, const std::vector<CompositeKey>& keys,
                            PageCache& cache) {
    SimTrace trace;
    trace.records.reserve(keys.size());
    std::uint64_t i = 0;
    for (const auto& key : keys) {
        std::uint64_t before = cache.fetches();
        store.lookup(key, &cache);
        trace.records.push_back({++i, cache.fetches() - before, cache.resident_count()});
    }
    return trace;
}

inline std::vector<CompositeKey> sample_present_keys(const Relation& rel, std::uint64_t count,
                                                     std::uint64_t seed) {
    auto positions = rel.sorted_logical_positions();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
    std::vector<CompositeKey> keys;
    keys.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        keys.push_back(delinearize(rel.schema(), positions[pick(rng)]));
    return keys;
}

/// Two-round constant estimation: round 1 on a cold cache approximates
/// the disk-bound constants, round 2 replays the same keys warm and
/// approximates the memory-bound ones. Fetch counts are the primary
/// units; wall-clock milliseconds are reported alongside.
struct ConstantEstimates {
    double disk_md_fetches = 0, disk_tbl_fetches = 0;
    double memory_md_fetches = 0, memory_tbl_fetches = 0;
    double disk_md_ms = 0, disk_tbl_ms = 0;
    double memory_md_ms = 0, memory_tbl_ms = 0;
};

template <typename Store>
inline std::pair<double, double> timed_pass(const Store& store,
                                            const std::vector<CompositeKey>& keys,
                                            PageCache& cache) {
    std::uint64_t before = cache.fetches();
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& key : keys) store.lookup(key, &cache);
    auto t1 = std::chrono::steady_clock::now();
    double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    double n = static_cast<double>(keys.size());
    return {static_cast<double>(cache.fetches() - before) / n, ms / n};
}

inline ConstantEstimates estimate_constants(const MultidimStore& md, const TableStore& tbl,
                                            const Relation& rel, std::uint64_t sample_size,
                                            std::uint64_t seed) {
    auto keys = sample_present_keys(rel, sample_size, seed);
    ConstantEstimates e;
    PageCache md_cache(0), tbl_cache(0);
    std::tie(e.disk_md_fetches, e.disk_md_ms) = timed_pass(md, keys, md_cache);
    std::tie(e.disk_tbl_fetches, e.disk_tbl_ms) = timed_pass(tbl, keys, tbl_cache);
    std::tie(e.memory_md_fetches, e.memory_md_ms) = timed_pass(md, keys, md_cache);
    std::tie(e.memory_tbl_fetches, e.memory_tbl_ms) = timed_pass(tbl, keys, tbl_cache);
    return e;
}

}  // namespace mdlab
