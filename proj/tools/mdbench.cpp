// mdbench: build, query and benchmark the two physical representations of
// a sparse relation, evaluate the cache models, and emit CSV reports.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mdlab/cache_model.hpp"
#include "mdlab/cache_sim.hpp"
#include "mdlab/dhc_store.hpp"
#include "mdlab/experiment.hpp"
#include "mdlab/relation.hpp"
#include "mdlab/table_store.hpp"

namespace fs = std::filesystem;
using namespace mdlab;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitIo = 4;

std::string g_config_hash;

// FNV-1a over the full command line; embedded in every output file so a
// result can be traced back to the exact invocation.
std::string hash_args(int argc, char** argv) {
    std::uint64_t h = 1469598103934665603ull;
    for (int i = 0; i < argc; ++i)
        for (const char* p = argv[i]; *p; ++p) {
            h ^= static_cast<std::uint8_t>(*p);
            h *= 1099511628211ull;
        }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::ofstream open_csv(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << "# config=" << g_config_hash << "\n";
    return f;
}

std::vector<std::uint32_t> parse_u32_list(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stoull(tok));
    return out;
}

std::vector<double> parse_f64_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

struct SizeReport {
    std::uint64_t table_bytes, dsc_bytes, dhc_bytes;
};

SizeReport size_report(const Relation& rel, DscParams params) {
    auto positions = rel.sorted_logical_positions();
    auto dsc = build_dsc(positions, params);
    auto md = build_dhc(rel, params);
    auto tbl = TableStore::build(rel);
    SizeReport r{};
    r.table_bytes = tbl.total_bytes();
    r.dhc_bytes = md.h_bytes() + md.c_bytes();
    // DSC store: raw header + same dimension arrays and cell array
    r.dsc_bytes = serialize_dsc(dsc).size() + md.dims_bytes().size() + md.c_bytes();
    return r;
}

int cmd_generate(const std::string& cards_s, double density, double skew, std::uint64_t seed,
                 std::uint32_t measures, const std::string& out) {
    auto rel = generate_synthetic(seed, parse_u32_list(cards_s), density, skew, measures);
    write_relation(rel, out);
    std::cout << "wrote " << out << " (" << rel.cell_count() << " cells, config="
              << g_config_hash << ")\n";
    return 0;
}

int cmd_build(const std::string& rel_path, const std::string& kind, std::uint8_t s,
              const std::string& out_dir) {
    auto rel = read_relation(rel_path);
    DscParams params(s);
    fs::create_directories(out_dir);

    if (kind == "dhc" || kind == "all") build_dhc(rel, params).write(fs::path(out_dir) / "dhc");
    if (kind == "dsc" || kind == "all") {
        auto dsc = build_dsc(rel.sorted_logical_positions(), params);
        fs::create_directories(fs::path(out_dir) / "dsc");
        io::write_file(fs::path(out_dir) / "dsc" / "header.dsc", serialize_dsc(dsc));
    }
    if (kind == "table" || kind == "all") TableStore::build(rel).write(fs::path(out_dir) / "table");

    auto r = size_report(rel, params);
    auto pct = [&](std::uint64_t b) { return 100.0 * static_cast<double>(b) / static_cast<double>(r.table_bytes); };
    auto csv = open_csv(fs::path(out_dir) / "sizes.csv");
    csv << "representation,bytes,percentage\n";
    csv << "table," << r.table_bytes << ",100.0\n";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", pct(r.dsc_bytes));
    csv << "dsc," << r.dsc_bytes << "," << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.1f", pct(r.dhc_bytes));
    csv << "dhc," << r.dhc_bytes << "," << buf << "\n";
    std::cout << "table " << r.table_bytes << " bytes (100%)\n"
              << "dsc   " << r.dsc_bytes << " bytes (" << pct(r.dsc_bytes) << "%)\n"
              << "dhc   " << r.dhc_bytes << " bytes (" << pct(r.dhc_bytes) << "%)\n";
    return 0;
}

int cmd_lookup(const std::string& store_dir, const std::string& kind, const std::string& key_s,
               const std::string& rel_path) {
    CompositeKey key = parse_u32_list(key_s);
    std::optional<std::vector<double>> result;
    if (kind == "dhc") {
        auto store = MultidimStore::open(store_dir);
        result = store.lookup(key);
    } else {
        // table files are loaded via their source relation
        auto rel = read_relation(rel_path);
        auto store = TableStore::build(rel);
        result = store.lookup(key);
    }
    if (!result) {
        std::cout << "empty\n";
        return 0;
    }
    for (std::size_t i = 0; i < result->size(); ++i)
        std::cout << (i ? "," : "") << (*result)[i];
    std::cout << "\n";
    return 0;
}

int cmd_model(const std::string& constants_s, const std::string& sizes_s,
              const std::string& profile_s, std::uint64_t imax, std::uint64_t points,
              const std::string& out_dir) {
    auto c = parse_f64_list(constants_s);
    if (c.size() != 4) throw InvalidProbability("--constants wants Mm,Mt,Dm,Dt");
    RepresentationConstants constants{c[0], c[1], c[2], c[3]};
    auto sizes = parse_f64_list(sizes_s);
    if (sizes.size() != 3) throw InvalidProbability("--sizes wants S,C,H");
    SpeedupParams params{sizes[0], sizes[1], sizes[2], constants};
    LevelProfile profile{parse_u64_list(profile_s)};
    TableCacheModel tbl{profile};
    MdCacheModel md{static_cast<std::uint64_t>(sizes[1] / static_cast<double>(kPageSize)) + 1};

    // thresholds + speed-up summary
    auto th = dominance_thresholds(constants);
    auto sm = speedup_max(params);
    {
        auto csv = open_csv(fs::path(out_dir) / "thresholds.csv");
        csv << "quantity,value\n";
        csv << "sufficient_pt," << th.sufficient_pt << "\n";
        if (th.case1_pt) csv << "case1_pt," << *th.case1_pt << "\n";
        if (th.case2_pm) csv << "case2_pm," << *th.case2_pm << "\n";
        csv << "line_slope," << th.line_slope << "\n";
        csv << "line_intercept," << th.line_intercept << "\n";
        csv << "speedup_max_location," << sm.location << "\n";
        csv << "speedup_max_value," << sm.value << "\n";
        csv << "hypothesis_ok," << (sm.hypothesis_ok ? 1 : 0) << "\n";
    }
    if (!sm.hypothesis_ok)
        std::cerr << "warning: speed-up curve hypothesis violated; curve still reported\n";

    bool degenerate = profile.max_level_pages() <= 1;
    {
        auto csv = open_csv(fs::path(out_dir) / "cache_curves.csv");
        csv << "i,md_cached,md_fetch,tbl_cached,tbl_fetch,tbl_fetch_est\n";
        for (std::uint64_t g = 0; g <= points; ++g) {
            double i = static_cast<double>(imax) * static_cast<double>(g) / static_cast<double>(points);
            double bmd = md_expected_cached(md, i);
            auto occ = table_expected_cached(tbl, i);
            double f = table_expected_fetch(tbl, occ.per_level);
            csv << i << ',' << bmd << ',' << md_expected_fetch(md, bmd) << ',' << occ.total << ','
                << f << ',';
            if (degenerate)
                csv << f;  // the special-case profile is exact already
            else
                csv << table_fetch_limit_at(tbl, i);
            csv << "\n";
        }
    }
    {
        auto csv = open_csv(fs::path(out_dir) / "time_curves.csv");
        csv << "x_bytes,T_m,T_t,speedup\n";
        double h = params.preloaded_bytes, s_total = params.table_bytes;
        double upper = std::max(s_total * 1.2, params.compressed_bytes + h);
        for (std::uint64_t g = 0; g <= points; ++g) {
            double x = h + (upper - h) * static_cast<double>(g) / static_cast<double>(points);
            csv << x << ',' << retrieval_time_md(params, x) << ',' << retrieval_time_table(params, x)
                << ',' << speedup_curve(params, x) << "\n";
        }
    }
    std::cout << "sufficient_pt=" << th.sufficient_pt << " slope=" << th.line_slope
              << " intercept=" << th.line_intercept << " speedup_max=" << sm.value << " at "
              << sm.location << "\n";
    return 0;
}

int cmd_simulate(const std::string& profile_s, std::uint64_t accesses, std::uint64_t trials,
                 std::uint64_t seed, std::uint64_t capacity, const std::string& out) {
    auto populations = parse_u64_list(profile_s);
    AccessModel model{populations, seed};
    std::vector<double> fetched(accesses, 0), resident(accesses, 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
        model.seed = seed + t * 1000003ull;
        PageCache cache(capacity);
        auto trace = simulate(model, cache, accesses);
        for (std::uint64_t i = 0; i < accesses; ++i) {
            fetched[i] += static_cast<double>(trace.records[i].fetched);
            resident[i] += static_cast<double>(trace.records[i].resident);
        }
    }
    auto csv = open_csv(out);
    csv << "i,fetched,resident\n";
    for (std::uint64_t i = 0; i < accesses; ++i)
        csv << (i + 1) << ',' << fetched[i] / static_cast<double>(trials) << ','
            << resident[i] / static_cast<double>(trials) << "\n";
    return 0;
}

int cmd_experiment(const std::string& rel_path, std::uint8_t s, std::uint64_t passes,
                   std::uint64_t sample, std::uint64_t trials, std::uint64_t seed,
                   std::uint64_t capacity, const std::string& out) {
    auto rel = read_relation(rel_path);
    auto md = build_dhc(rel, DscParams(s));
    auto tbl = TableStore::build(rel);
    ExperimentConfig cfg{seed, passes, sample, capacity, trials};
    auto res = run_experiment(rel, md, tbl, cfg);

    auto csv = open_csv(out);
    csv << "pass,md_memory_bytes,md_avg_fetches,md_model_fetches,"
           "tbl_memory_bytes,tbl_avg_fetches,tbl_model_fetches\n";
    for (const auto& r : res.rows)
        csv << r.pass << ',' << r.md_memory_bytes << ',' << r.md_avg_fetches << ','
            << r.md_model_fetches << ',' << r.tbl_memory_bytes << ',' << r.tbl_avg_fetches << ','
            << r.tbl_model_fetches << "\n";

    std::cout << "md pages=" << res.md_pages << " H=" << res.h_bytes << " C=" << res.c_bytes
              << " table bytes=" << res.table_bytes << "\n";
    std::cout << "fit: md max rel dev=" << res.md_max_rel_dev
              << " tbl max rel dev=" << res.tbl_max_rel_dev
              << " md_below_tbl=" << (res.md_always_below_tbl ? "yes" : "no") << "\n";
    return 0;
}

int cmd_plot(const std::string& report, const std::string& out_dir) {
    std::ifstream f(report);
    if (!f) throw IoError("cannot open report: " + report);
    fs::create_directories(out_dir);
    auto array = open_csv(fs::path(out_dir) / "array.dat");
    auto table = open_csv(fs::path(out_dir) / "table.dat");
    auto array_est = open_csv(fs::path(out_dir) / "array_est.dat");
    auto table_est = open_csv(fs::path(out_dir) / "table_est.dat");
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {  // header row
            header_seen = true;
            continue;
        }
        auto cols = parse_f64_list(line);
        if (cols.size() < 7) throw FormatError("bad report row: " + line);
        array << cols[1] << ' ' << cols[2] << "\n";
        array_est << cols[1] << ' ' << cols[3] << "\n";
        table << cols[4] << ' ' << cols[5] << "\n";
        table_est << cols[4] << ' ' << cols[6] << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    g_config_hash = hash_args(argc, argv);
    CLI::App app{"storage-representation benchmark lab"};
    app.require_subcommand(1);

    // generate
    std::string cards = "100,100", rel_out = "relation.txt";
    double density = 0.01, skew = 0.0;
    std::uint64_t seed = 1;
    std::uint32_t measures = 1;
    auto* gen = app.add_subcommand("generate", "generate a synthetic relation");
    gen->add_option("--cards", cards, "dimension cardinalities, comma separated");
    gen->add_option("--density", density, "nonempty-cell density in (0,1]");
    gen->add_option("--skew", skew, "clustering parameter in [0,1)");
    gen->add_option("--seed", seed);
    gen->add_option("--measures", measures, "measures per cell");
    gen->add_option("--out", rel_out, "output relation file");

    // build
    std::string rel_path = "relation.txt", kind = "all", out_dir = "stores";
    std::uint8_t sbits = 16;
    auto* build = app.add_subcommand("build", "build physical representations");
    build->add_option("--relation", rel_path)->required();
    build->add_option("--kind", kind)->check(CLI::IsMember({"dhc", "dsc", "table", "all"}));
    build->add_option("--s", sbits, "difference element bits: 8, 16 or 32");
    build->add_option("--out", out_dir, "output directory");

    // lookup
    std::string store_dir = "stores/dhc", lkind = "dhc", key_s, lookup_rel;
    auto* lookup = app.add_subcommand("lookup", "point query against a store");
    lookup->add_option("--store", store_dir, "dhc store directory");
    lookup->add_option("--kind", lkind)->check(CLI::IsMember({"dhc", "table"}));
    lookup->add_option("--key", key_s, "composite key, comma separated")->required();
    lookup->add_option("--relation", lookup_rel, "relation file (table kind)");

    // model
    std::string constants_s, sizes_s, profile_s = "1,10,100";
    std::uint64_t imax = 100000, points = 200;
    std::string model_out = "model";
    auto* model = app.add_subcommand("model", "evaluate the analytic cache models");
    model->add_option("--constants", constants_s, "Mm,Mt,Dm,Dt in ms")->required();
    model->add_option("--sizes", sizes_s, "S,C,H in bytes")->required();
    model->add_option("--profile", profile_s, "pages per level N_1,...,N_L");
    model->add_option("--imax", imax, "largest access index for cache curves");
    model->add_option("--points", points, "grid points per curve");
    model->add_option("--out", model_out, "output directory");

    // simulate
    std::string sim_profile = "100", sim_out = "trace.csv";
    std::uint64_t accesses = 1000, trials = 1, capacity = 0;
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo page-cache simulation");
    sim->add_option("--profile", sim_profile, "page populations, one per level");
    sim->add_option("--accesses", accesses);
    sim->add_option("--trials", trials);
    sim->add_option("--seed", seed);
    sim->add_option("--capacity", capacity, "cache capacity in pages; 0 = unbounded");
    sim->add_option("--out", sim_out);

    // experiment
    std::string exp_rel, exp_out = "report.csv";
    std::uint64_t passes = 20, sample = 100, exp_trials = 10;
    auto* exp = app.add_subcommand("experiment", "measured vs predicted fetch curves");
    exp->add_option("--relation", exp_rel)->required();
    exp->add_option("--s", sbits);
    exp->add_option("--passes", passes);
    exp->add_option("--sample", sample, "lookups per pass");
    exp->add_option("--trials", exp_trials);
    exp->add_option("--seed", seed);
    exp->add_option("--capacity", capacity);
    exp->add_option("--out", exp_out);

    // plot
    std::string plot_report = "report.csv", plot_out = "plots";
    auto* plot = app.add_subcommand("plot", "emit gnuplot-ready series from a report");
    plot->add_option("--report", plot_report);
    plot->add_option("--out", plot_out);

    try {
        app.parse(argc, argv);
        if (gen->parsed())
            return cmd_generate(cards, density, skew, seed, measures, rel_out);
        if (build->parsed()) return cmd_build(rel_path, kind, sbits, out_dir);
        if (lookup->parsed()) return cmd_lookup(store_dir, lkind, key_s, lookup_rel);
        if (model->parsed())
            return cmd_model(constants_s, sizes_s, profile_s, imax, points, model_out);
        if (sim->parsed())
            return cmd_simulate(sim_profile, accesses, trials, seed, capacity, sim_out);
        if (exp->parsed())
            return cmd_experiment(exp_rel, sbits, passes, sample, exp_trials, seed, capacity,
                                  exp_out);
        if (plot->parsed()) return cmd_plot(plot_report, plot_out);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const InvalidDensity& e) {
        std::cerr << "error: InvalidDensity: " << e.what() << "\n";
        return kExitUsage;
    } catch (const InvalidProbability& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
