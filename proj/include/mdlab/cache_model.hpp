#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mdlab/error.hpp"
#include "mdlab/table_store.hpp"

namespace mdlab {

// (1 - 1/n)^i, with 0^0 = 1. Computed through log1p so that large i and
// large n keep full double precision.
inline double decay_pow(double n, double i) {
    if (i == 0.0) return 1.0;
    if (n == 1.0) return 0.0;
    return std::exp(i * std::log1p(-1.0 / n));
}

// --- Single-population model (compressed array) ------------------------

struct MdCacheModel {
    std::uint64_t pages;  // N >= 1
};

/// Expected cached pages after i uniform accesses, cold start.
inline double md_expected_cached(const MdCacheModel& m, double i) {
    double n = static_cast<double>(m.pages);
    return n * (1.0 - decay_pow(n, i));
}

/// Expected pages fetched by one access at occupancy B.
inline double md_expected_fetch(const MdCacheModel& m, double cached) {
    double n = static_cast<double>(m.pages);
    if (cached < 0.0 || cached > n) throw InvalidOccupancy("occupancy outside [0, N]");
    return 1.0 - cached / n;
}

// --- Leveled model (B-tree + heap) -------------------------------------

struct TableCacheModel {
    LevelProfile profile;

    std::uint64_t total_pages() const { return profile.total_pages(); }
    std::uint64_t max_level_pages() const { return profile.max_level_pages(); }
    std::size_t levels() const { return profile.level_count(); }
};

struct TableOccupancy {
    double total = 0.0;
    std::vector<double> per_level;
};

inline TableOccupancy table_expected_cached(const TableCacheModel& m, double i) {
    TableOccupancy out;
    out.per_level.reserve(m.levels());
    for (auto pages : m.profile.pages) {
        double n = static_cast<double>(pages);
        double b = n * (1.0 - decay_pow(n, i));
        out.per_level.push_back(b);
        out.total += b;
    }
    return out;
}

inline double table_expected_fetch(const TableCacheModel& m, const std::vector<double>& per_level) {
    if (per_level.size() != m.levels()) throw InvalidOccupancy("per-level occupancy arity mismatch");
    double f = static_cast<double>(m.levels());
    for (std::size_t l = 0; l < per_level.size(); ++l) {
        double n = static_cast<double>(m.profile.pages[l]);
        if (per_level[l] < 0.0 || per_level[l] > n)
            throw InvalidOccupancy("per-level occupancy outside [0, N_l]");
        f -= per_level[l] / n;
    }
    return f;
}

/// Exact expected fetches after i accesses: sum of (1 - 1/N_l)^i.
inline double table_fetch_exact(const TableCacheModel& m, double i) {
    double f = 0.0;
    for (auto pages : m.profile.pages) f += decay_pow(static_cast<double>(pages), i);
    return f;
}

/// Asymptotic estimate (N - B) / N_m for a given occupancy.
inline double table_fetch_limit(const TableCacheModel& m, double cached) {
    std::uint64_t nm = m.max_level_pages();
    if (nm <= 1) throw DegenerateProfile("N_m = 1 profile has no asymptotic regime");
    double n = static_cast<double>(m.total_pages());
    if (cached > n) throw InvalidOccupancy("occupancy above N");
    return (n - cached) / static_cast<double>(nm);
}

/// N - B_i evaluated directly from i; avoids the catastrophic
/// cancellation of n - n*(1 - r^i) once r^i underflows the subtraction.
inline double table_expected_residual(const TableCacheModel& m, double i) {
    double residual = 0.0;
    for (auto pages : m.profile.pages) {
        double n = static_cast<double>(pages);
        residual += n * decay_pow(n, i);
    }
    return residual;
}

/// Asymptotic estimate (N - B_i) / N_m as a function of i.
inline double table_fetch_limit_at(const TableCacheModel& m, double i) {
    std::uint64_t nm = m.max_level_pages();
    if (nm <= 1) throw DegenerateProfile("N_m = 1 profile has no asymptotic regime");
    return table_expected_residual(m, i) / static_cast<double>(nm);
}

/// Weighted average W_i of the level sizes; tends to N_m. Terms are
/// scaled by the dominant ratio so large i cannot underflow.
inline double table_weighted_average(const TableCacheModel& m, double i) {
    double nm = static_cast<double>(m.max_level_pages());
    if (nm <= 1.0) throw DegenerateProfile("N_m = 1");
    double log_rm = std::log1p(-1.0 / nm);
    double num = 0.0, den = 0.0;
    for (auto pages : m.profile.pages) {
        double n = static_cast<double>(pages);
        double scaled;  // (r_l / r_m)^i
        if (i == 0.0)
            scaled = 1.0;
        else if (n == 1.0)
            scaled = 0.0;
        else
            scaled = std::exp(i * (std::log1p(-1.0 / n) - log_rm));
        num += n * scaled;
        den += scaled;
    }
    return num / den;
}

// --- Retrieval-time model ----------------------------------------------

/// Measured per-retrieval constants, milliseconds: memory-hit and
/// disk-access cases for each representation.
struct RepresentationConstants {
    double memory_md;   // M_m
    double memory_tbl;  // M_t
    double disk_md;     // D_m
    double disk_tbl;    // D_t
};

inline double expected_retrieval_time(double p, double memory_ms, double disk_ms) {
    if (p < 0.0 || p > 1.0) throw InvalidProbability("p outside [0, 1]");
    return p * memory_ms + (1.0 - p) * disk_ms;
}

struct DominanceThresholds {
    double sufficient_pt;            // (D_t - D_m) / (D_t - M_t)
    std::optional<double> case1_pt;  // M_t < M_m: table wins only above this p_t
    std::optional<double> case2_pm;  // M_m < M_t: array wins everywhere above this p_m
    double line_slope;               // (D_m - M_m) / (D_t - M_t)
    double line_intercept;           // (D_t - D_m) / (D_t - M_t)
};

inline DominanceThresholds dominance_thresholds(const RepresentationConstants& c) {
    if (c.disk_tbl <= c.memory_tbl) throw ModelHypothesisViolated("requires D_t > M_t");
    if (c.disk_md <= c.memory_md) throw ModelHypothesisViolated("requires D_m > M_m");
    DominanceThresholds t{};
    t.sufficient_pt = (c.disk_tbl - c.disk_md) / (c.disk_tbl - c.memory_tbl);
    t.line_slope = (c.disk_md - c.memory_md) / (c.disk_tbl - c.memory_tbl);
    t.line_intercept = t.sufficient_pt;
    if (c.memory_tbl < c.memory_md)
        t.case1_pt = (c.disk_tbl - c.memory_md) / (c.disk_tbl - c.memory_tbl);
    if (c.memory_md < c.memory_tbl)
        t.case2_pm = (c.disk_md - c.memory_tbl) / (c.disk_md - c.memory_md);
    return t;
}

/// True iff the multidimensional representation has the smaller expected
/// retrieval time at hit probabilities (p_m, p_t).
inline bool dominates(const RepresentationConstants& c, double p_m, double p_t) {
    if (c.disk_tbl <= c.memory_tbl) throw ModelHypothesisViolated("requires D_t > M_t");
    if (p_m < 0.0 || p_m > 1.0 || p_t < 0.0 || p_t > 1.0)
        throw InvalidProbability("probability outside [0, 1]");
    DominanceThresholds t = dominance_thresholds(c);
    return p_t < t.line_slope * p_m + t.line_intercept;
}

// --- Memory-vs-time curves and speed-up --------------------------------

struct SpeedupParams {
    double table_bytes;       // S
    double compressed_bytes;  // C
    double preloaded_bytes;   // H
    RepresentationConstants constants;

    double a1() const { return (constants.memory_tbl - constants.disk_tbl) / table_bytes; }
    double b1() const { return constants.disk_tbl; }
    double a2() const { return (constants.memory_md - constants.disk_md) / compressed_bytes; }
    double b2() const { return -a2() * preloaded_bytes + constants.disk_md; }

    bool hypothesis_holds() const {
        return 0.0 > a1() && a1() > a2() && 0.0 < b2() && b2() < b1();
    }
};

inline double retrieval_time_table(const SpeedupParams& p, double x) {
    if (x < 0.0) throw InsufficientMemory("x must be nonnegative");
    double pt = std::min(x / p.table_bytes, 1.0);
    return (p.constants.memory_tbl - p.constants.disk_tbl) * pt + p.constants.disk_tbl;
}

inline double retrieval_time_md(const SpeedupParams& p, double x) {
    if (x < p.preloaded_bytes) throw InsufficientMemory("x below the preloaded size H");
    double pm = std::min((x - p.preloaded_bytes) / p.compressed_bytes, 1.0);
    return (p.constants.memory_md - p.constants.disk_md) * pm + p.constants.disk_md;
}

inline double speedup_curve(const SpeedupParams& p, double x) {
    return retrieval_time_table(p, x) / retrieval_time_md(p, x);
}

struct SpeedupMax {
    double location;  // C + H
    double value;
    bool hypothesis_ok;
};

inline SpeedupMax speedup_max(const SpeedupParams& p) {
    double loc = p.compressed_bytes + p.preloaded_bytes;
    double value = (p.a1() * loc + p.b1()) / p.constants.memory_md;
    return {loc, value, p.hypothesis_holds()};
}

}  // namespace mdlab
