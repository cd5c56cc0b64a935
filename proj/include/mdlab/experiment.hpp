#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mdlab/cache_model.hpp"
#include "mdlab/cache_sim.hpp"
#include "mdlab/dhc_store.hpp"
#include "mdlab/table_store.hpp"

namespace mdlab {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    std::uint64_t passes = 20;
    std::uint64_t sample_per_pass = 100;
    std::uint64_t cache_capacity = 0;  // pages; 0 = unbounded
    std::uint64_t trials = 1;          // independent repetitions averaged together
};

struct PassRow {
    std::uint64_t pass = 0;
    double md_memory_bytes = 0;   // H + cached cell pages, end of pass
    double md_avg_fetches = 0;
    double md_model_fetches = 0;  // analytic prediction for this pass
    double tbl_memory_bytes = 0;
    double tbl_avg_fetches = 0;
    double tbl_model_fetches = 0;
};

struct ExperimentResult {
    std::vector<PassRow> rows;
    double md_max_rel_dev = 0;   // measured vs model, worst pass
    double tbl_max_rel_dev = 0;
    bool md_always_below_tbl = true;
    std::uint64_t md_pages = 0;
    LevelProfile tbl_profile;
    std::uint64_t h_bytes = 0;
    std::uint64_t c_bytes = 0;
    std::uint64_t table_bytes = 0;
};

/// Replays `passes` rounds of uniform present-key samples against both
/// stores under a countable cache, averaging fetch counts over `trials`
/// independent repetitions, and joins each pass with the analytic
/// prediction for the same access index.
inline ExperimentResult run_experiment(const Relation& rel, const MultidimStore& md,
                                       const TableStore& tbl, const ExperimentConfig& cfg) {
    ExperimentResult res;
    res.md_pages = md.cell_pages();
    res.tbl_profile = tbl.level_profile();
    res.h_bytes = md.h_bytes();
    res.c_bytes = md.c_bytes();
    res.table_bytes = tbl.total_bytes();

    const std::uint64_t per_pass = cfg.sample_per_pass;
    const std::uint64_t total = cfg.passes * per_pass;
    std::vector<double> md_fetch(cfg.passes, 0), tbl_fetch(cfg.passes, 0);
    std::vector<double> md_resident(cfg.passes, 0), tbl_resident(cfg.passes, 0);

    for (std::uint64_t t = 0; t < cfg.trials; ++t) {
        std::uint64_t seed = cfg.seed + t * 1000003ull;
        auto keys = sample_present_keys(rel, total, seed);
        PageCache md_cache(cfg.cache_capacity), tbl_cache(cfg.cache_capacity);
        auto md_trace = run_store_workload(md, keys, md_cache);
        auto tbl_trace = run_store_workload(tbl, keys, tbl_cache);
        for (std::uint64_t p = 0; p < cfg.passes; ++p) {
            std::uint64_t lo = p * per_pass, hi = lo + per_pass;
            for (std::uint64_t i = lo; i < hi; ++i) {
                md_fetch[p] += static_cast<double>(md_trace.records[i].fetched);
                tbl_fetch[p] += static_cast<double>(tbl_trace.records[i].fetched);
            }
            md_resident[p] += static_cast<double>(md_trace.records[hi - 1].resident);
            tbl_resident[p] += static_cast<double>(tbl_trace.records[hi - 1].resident);
        }
    }

    MdCacheModel md_model{res.md_pages};
    TableCacheModel tbl_model{res.tbl_profile};
    double trials = static_cast<double>(cfg.trials);
    double samples = static_cast<double>(per_pass);
    for (std::uint64_t p = 0; p < cfg.passes; ++p) {
        PassRow row;
        row.pass = p + 1;
        row.md_avg_fetches = md_fetch[p] / (trials * samples);
        row.tbl_avg_fetches = tbl_fetch[p] / (trials * samples);
        row.md_memory_bytes = static_cast<double>(res.h_bytes) +
                              md_resident[p] / trials * static_cast<double>(kPageSize);
        row.tbl_memory_bytes = tbl_resident[p] / trials * static_cast<double>(kPageSize);
        double i0 = static_cast<double>(p * per_pass);
        double i1 = static_cast<double>((p + 1) * per_pass);
        row.md_model_fetches =
            (md_expected_cached(md_model, i1) - md_expected_cached(md_model, i0)) / samples;
        row.tbl_model_fetches =
            (table_expected_cached(tbl_model, i1).total - table_expected_cached(tbl_model, i0).total) /
            samples;
        if (row.md_avg_fetches >= row.tbl_avg_fetches) res.md_always_below_tbl = false;
        if (row.md_model_fetches > 0)
            res.md_max_rel_dev = std::max(
                res.md_max_rel_dev,
                std::abs(row.md_avg_fetches - row.md_model_fetches) / row.md_model_fetches);
        if (row.tbl_model_fetches > 0)
            res.tbl_max_rel_dev = std::max(
                res.tbl_max_rel_dev,
                std::abs(row.tbl_avg_fetches - row.tbl_model_fetches) / row.tbl_model_fetches);
        res.rows.push_back(row);
    }
    return res;
}

}  // namespace mdlab
