#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mdlab/cache_model.hpp"

using namespace mdlab;

namespace {

const RepresentationConstants kTpcD{0.031, 0.021, 6.169, 16.724};
const RepresentationConstants kTpcH{0.014, 0.018, 7.093, 21.165};
const RepresentationConstants kApb1{0.012, 0.128, 6.778, 19.841};

}  // namespace

TEST_CASE("md expected cached pages") {
    CHECK(md_expected_cached({100}, 0) == 0.0);
    CHECK(md_expected_cached({1}, 1) == 1.0);
    CHECK(md_expected_cached({1}, 0) == 0.0);  // 0^0 = 1 convention
    CHECK(md_expected_cached({100}, 100) == Catch::Approx(63.397).margin(0.5));
}

TEST_CASE("md expected fetch") {
    CHECK(md_expected_fetch({5}, 0.0) == 1.0);
    CHECK(md_expected_fetch({5}, 5.0) == 0.0);
    CHECK(md_expected_fetch({4}, 1.0) == 0.75);
    CHECK_THROWS_AS(md_expected_fetch({4}, 5.0), InvalidOccupancy);
}

TEST_CASE("md recurrence consistency B_i = B_{i-1} + f(B_{i-1})") {
    for (std::uint64_t n : {1ull, 2ull, 10ull, 1000ull}) {
        MdCacheModel m{n};
        for (int i = 1; i <= 200; ++i) {
            double prev = md_expected_cached(m, i - 1);
            double next = md_expected_cached(m, i);
            CHECK(next == Catch::Approx(prev + md_expected_fetch(m, prev)).epsilon(1e-12));
        }
    }
}

TEST_CASE("table expected cached pages") {
    TableCacheModel m{{{1, 10, 100}}};
    auto cold = table_expected_cached(m, 0);
    CHECK(cold.total == 0.0);

    auto warm = table_expected_cached(m, 10);
    REQUIRE(warm.per_level.size() == 3);
    CHECK(warm.per_level[0] == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(warm.per_level[1] == Catch::Approx(6.513).epsilon(0.02));
    CHECK(warm.per_level[2] == Catch::Approx(9.562).epsilon(0.02));

    // all-ones profile: B_1 = L and stays there
    TableCacheModel ones{{{1, 1, 1, 1}}};
    for (int i = 1; i <= 50; ++i)
        CHECK(table_expected_cached(ones, i).total == Catch::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("per-level table occupancy equals the single-population formula") {
    TableCacheModel m{{{1, 7, 31, 600}}};
    for (double i : {1.0, 5.0, 50.0, 2000.0}) {
        auto occ = table_expected_cached(m, i);
        for (std::size_t l = 0; l < m.levels(); ++l)
            CHECK(occ.per_level[l] ==
                  Catch::Approx(md_expected_cached({m.profile.pages[l]}, i)).epsilon(1e-12));
    }
}

TEST_CASE("table expected fetch") {
    TableCacheModel m{{{1, 10, 100}}};
    CHECK(table_expected_fetch(m, {0, 0, 0}) == 3.0);
    CHECK(table_expected_fetch(m, {1, 10, 100}) == Catch::Approx(0.0).margin(1e-12));
    CHECK(table_expected_fetch(m, {1, 5, 50}) == Catch::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(table_expected_fetch(m, {2, 0, 0}), InvalidOccupancy);
    CHECK_THROWS_AS(table_expected_fetch(m, {0, 0}), InvalidOccupancy);
}

TEST_CASE("proof identities: f(B_i) = sum r^i and N - B_i = sum N_l r^i") {
    TableCacheModel m{{{1, 10, 100, 1000}}};
    double n = static_cast<double>(m.total_pages());
    for (double i : {0.0, 1.0, 10.0, 100.0, 5000.0}) {
        auto occ = table_expected_cached(m, i);
        double f = table_expected_fetch(m, occ.per_level);
        double sum_r = 0, sum_nr = 0;
        for (auto pages : m.profile.pages) {
            double r = decay_pow(static_cast<double>(pages), i);
            sum_r += r;
            sum_nr += static_cast<double>(pages) * r;
        }
        CHECK(f == Catch::Approx(sum_r).epsilon(1e-12));
        CHECK(n - occ.total == Catch::Approx(sum_nr).epsilon(1e-12).margin(1e-9));
        CHECK(f == Catch::Approx(table_fetch_exact(m, i)).epsilon(1e-12));
    }
}

TEST_CASE("weighted average tends to N_m") {
    TableCacheModel m{{{1, 10, 100}}};
    CHECK(table_weighted_average(m, 500) == Catch::Approx(100.0).epsilon(0.01));

    // single dominant level: |w_i - N_m| <= N_m (r_1/r_m)^i L
    TableCacheModel two{{{1, 50}}};
    for (double i : {1.0, 10.0, 100.0}) {
        double w = table_weighted_average(two, i);
        CHECK(std::abs(w - 50.0) <= 50.0 * decay_pow(1.0, i) * 2 + 1e-9);
        CHECK(w == Catch::Approx(50.0).epsilon(1e-9));  // r_1 = 0 exactly
    }

    CHECK_THROWS_AS(table_weighted_average(TableCacheModel{{{1, 1}}}, 10), DegenerateProfile);
}

TEST_CASE("fetch limit estimate differs from exact f at small i") {
    TableCacheModel m{{{1, 10, 100}}};
    double est0 = table_fetch_limit(m, 0.0);
    CHECK(est0 == Catch::Approx(111.0 / 100.0));
    CHECK(est0 != 3.0);  // exact cold value is L
    CHECK_THROWS_AS(table_fetch_limit(TableCacheModel{{{1, 1}}}, 0.0), DegenerateProfile);
}

TEST_CASE("convergence of f(B_i) to (N - B_i)/N_m") {
    TableCacheModel m{{{1, 10, 100, 1000}}};
    for (double i : {1e4, 3e4, 1e5}) {
        double f = table_fetch_exact(m, i);
        double est = table_fetch_limit_at(m, i);
        CHECK(std::abs(f - est) / f < 0.01);
    }
}

TEST_CASE("expected retrieval time") {
    CHECK(expected_retrieval_time(1.0, 0.5, 9.0) == 0.5);
    CHECK(expected_retrieval_time(0.0, 0.5, 9.0) == 9.0);
    CHECK(expected_retrieval_time(0.5, kTpcD.memory_tbl, kTpcD.disk_tbl) ==
          Catch::Approx(8.3725));
    for (double p : {0.0, 0.3, 0.9, 1.0})
        CHECK(expected_retrieval_time(p, 2.0, 7.0) >= 2.0);
    CHECK_THROWS_AS(expected_retrieval_time(1.5, 1, 2), InvalidProbability);
}

TEST_CASE("dominance thresholds per benchmark") {
    auto d = dominance_thresholds(kTpcD);
    CHECK(d.sufficient_pt == Catch::Approx(0.632).margin(0.001));
    REQUIRE(d.case1_pt.has_value());
    CHECK(*d.case1_pt == Catch::Approx(0.999).margin(0.001));
    CHECK_FALSE(d.case2_pm.has_value());
    CHECK(d.line_slope == Catch::Approx(0.368).margin(0.001));
    CHECK(d.line_intercept == Catch::Approx(0.632).margin(0.001));

    auto h = dominance_thresholds(kTpcH);
    CHECK(h.sufficient_pt == Catch::Approx(0.665).margin(0.001));
    REQUIRE(h.case2_pm.has_value());
    CHECK(*h.case2_pm == Catch::Approx(0.999).margin(0.001));
    CHECK(h.line_slope == Catch::Approx(0.335).margin(0.001));

    auto a = dominance_thresholds(kApb1);
    CHECK(a.sufficient_pt == Catch::Approx(0.663).margin(0.001));
    REQUIRE(a.case2_pm.has_value());
    CHECK(*a.case2_pm == Catch::Approx(0.983).margin(0.001));
    CHECK(a.line_slope == Catch::Approx(0.343).margin(0.001));

    CHECK_THROWS_AS(dominance_thresholds({5.0, 5.0, 6.0, 4.0}), ModelHypothesisViolated);
}

TEST_CASE("dominates agrees with direct expected-time comparison") {
    for (const auto& c : {kTpcD, kTpcH, kApb1}) {
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                double pm = i / 100.0, pt = j / 100.0;
                bool direct = expected_retrieval_time(pm, c.memory_md, c.disk_md) <
                              expected_retrieval_time(pt, c.memory_tbl, c.disk_tbl);
                CHECK(dominates(c, pm, pt) == direct);
            }
    }
    CHECK(dominates(kTpcD, 0.0, 0.0));        // D_m < D_t
    CHECK_FALSE(dominates(kTpcD, 1.0, 1.0));  // M_t < M_m
    CHECK(dominates(kApb1, 1.0, 1.0));        // M_m < M_t
}

TEST_CASE("retrieval time curves") {
    SpeedupParams p{279636324, 48007720, 19006592, kTpcD};
    CHECK(retrieval_time_md(p, p.preloaded_bytes) == Catch::Approx(kTpcD.disk_md));
    CHECK(retrieval_time_md(p, p.preloaded_bytes + p.compressed_bytes) ==
          Catch::Approx(kTpcD.memory_md));
    CHECK(retrieval_time_table(p, 0) == Catch::Approx(kTpcD.disk_tbl));
    CHECK(retrieval_time_table(p, p.table_bytes) == Catch::Approx(kTpcD.memory_tbl));
    CHECK(retrieval_time_table(p, p.table_bytes * 3) == Catch::Approx(kTpcD.memory_tbl));
    CHECK(retrieval_time_table(p, 67014312.0) == Catch::Approx(12.72).margin(0.01));
    CHECK_THROWS_AS(retrieval_time_md(p, 100.0), InsufficientMemory);
}

TEST_CASE("speed-up maxima per benchmark") {
    SpeedupParams tpcd{279636324, 48007720, 19006592, kTpcD};
    auto m1 = speedup_max(tpcd);
    CHECK(m1.location == 67014312.0);
    CHECK(m1.value == Catch::Approx(416.0).epsilon(0.03));
    CHECK(m1.hypothesis_ok);

    SpeedupParams tpch{1419181908, 239996040, 154024844, kTpcH};
    auto m2 = speedup_max(tpch);
    CHECK(m2.location == 394020884.0);
    CHECK(m2.value == Catch::Approx(1066.0).epsilon(0.03));

    SpeedupParams apb{1295228960, 99144000, 4225039, kApb1};
    auto m3 = speedup_max(apb);
    CHECK(m3.location == 103369039.0);
    CHECK(m3.value == Catch::Approx(1549.0).epsilon(0.03));

    // past S the ratio is constant M_t / M_m
    CHECK(speedup_curve(tpcd, tpcd.table_bytes * 2) ==
          Catch::Approx(kTpcD.memory_tbl / kTpcD.memory_md));
}

TEST_CASE("speed-up curve shape on random admissible parameters") {
    std::mt19937_64 rng(37);
    int accepted = 0;
    while (accepted < 10) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double s = 1e8 * (0.5 + u(rng));
        double c = s * (0.05 + 0.4 * u(rng));
        double h = c * (0.05 + 0.5 * u(rng));
        RepresentationConstants k{0.01 + 0.1 * u(rng), 0.01 + 0.1 * u(rng), 3 + 5 * u(rng),
                                  10 + 10 * u(rng)};
        SpeedupParams p{s, c, h, k};
        if (!p.hypothesis_holds()) continue;
        ++accepted;
        double peak = c + h;
        double prev = speedup_curve(p, h);
        for (int g = 1; g <= 100; ++g) {
            double x = h + (peak - h) * g / 100.0;
            double v = speedup_curve(p, x);
            CHECK(v > prev - 1e-12);
            prev = v;
        }
        for (int g = 1; g <= 100; ++g) {
            double x = peak + (s - peak) * g / 100.0;
            double v = speedup_curve(p, x);
            CHECK(v < prev + 1e-12);
            prev = v;
        }
    }
}
