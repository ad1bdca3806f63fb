#include "cli.hpp"

#include "xlayer/adversary.hpp"
#include "xlayer/cost_bench.hpp"
#include "xlayer/run_config.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace xlayer::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRejected = 1;
constexpr int kExitUsage = 2;
constexpr std::uint64_t kDwellNs = 30'000'000'000ULL;

struct Common {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config;
    std::optional<std::string> map;
    bool strict = false;
};

void add_common(CLI::App* sub, Common& c, bool with_map)
{
    sub->add_option("--seed", c.seed, "Master seed (overrides the config file)");
    sub->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
    if (with_map) {
        sub->add_option("--map", c.map, "Radio map file to load instead of synthesizing one")
            ->check(CLI::ExistingFile);
    }
    sub->add_flag("--strict", c.strict, "Exit 1 when any domain rejection occurs");
}

RunConfig resolve(const Common& c)
{
    RunConfig cfg = c.config ? load_config_file(*c.config) : RunConfig{};
    if (c.seed) {
        cfg.world.env.seed = *c.seed;
    }
    if (c.map) {
        cfg.map_path = *c.map;
    }
    validate(cfg);
    attach_radio_map(cfg);
    return cfg;
}

int gen_map(const Common& c, const std::string& out_path, std::ostream& out)
{
    RunConfig cfg = resolve(c);
    const RadioMap db = synthesize_world_map(cfg.world);
    save_radio_map(db, out_path);
    std::set<std::uint32_t> zones;
    std::set<std::pair<double, double>> points;
    for (const RadioMapRecord& r : db) {
        zones.insert(r.zone_id);
        points.insert({r.location.x, r.location.y});
    }
    out << "gen-map seed=" << cfg.seed() << " records=" << db.size() << " points=" << points.size()
        << " zones=" << zones.size() << " out=" << out_path << "\n";
    return kExitOk;
}

int run_auth(const Common& c, const std::optional<std::string>& sla_flag, const std::optional<double>& drop,
             std::size_t trace_len, std::ostream& out)
{
    RunConfig cfg = resolve(c);
    if (sla_flag) {
        cfg.world.protocol.sla = parse_sla(*sla_flag);
    }
    if (drop) {
        if (*drop < 0.0 || *drop > 1.0) {
            throw ConfigError("--drop-rate must be in [0, 1]");
        }
        cfg.world.uplink_drop = *drop;
        cfg.world.downlink_drop = *drop;
    }
    const SlaMode sla = cfg.world.protocol.sla;
    World w = World::build(cfg.world);
    out << "world seed=" << cfg.seed() << " sla=" << to_string(sla) << " scheme=" << to_string(w.as().params().scheme)
        << " records=" << w.radio_map().size() << " zones=" << w.zones().zone_count() << " epsilon=" << w.epsilon()
        << "\n";

    Rng rng = Rng(cfg.seed()).fork("run-auth");
    const auto& sites = w.sites();
    std::size_t full = 0, fast = 0, ok = 0, rejected = 0, timed_out = 0;
    for (std::size_t i = 0; i < trace_len; ++i) {
        const CellSite& site = sites[i % sites.size()];
        w.advance(kDwellNs);
        w.place_mt(1, site.anchors[rng.below(site.anchors.size())]);
        const SessionVerdict v = handover(w, 1, sla);
        const bool is_fast = v.outcome == Outcome::FastPathSuccess;
        full += is_fast ? 0 : 1;
        fast += is_fast ? 1 : 0;
        if (v.outcome == Outcome::MutualAuthSuccess || is_fast) {
            ++ok;
        } else if (v.outcome == Outcome::TimedOut) {
            ++timed_out;
        } else {
            ++rejected;
        }
        out << "verdict step=" << i << " session=" << v.session_id << " cell=" << site.cell_id
            << " zone=" << site.zone_id << " outcome=" << to_string(v.outcome) << " reason=" << to_string(v.reason)
            << " messages=" << v.messages << " cipher=" << v.counters.cipher_block_ops
            << " prf=" << v.counters.prf_calls << " knn=" << v.counters.knn_distance_evals
            << " bytes=" << v.counters.bytes_sent << "\n";
    }
    out << "summary sessions=" << trace_len << " full=" << full << " fast=" << fast << " ok=" << ok
        << " rejected=" << rejected << " timed_out=" << timed_out << "\n";
    return c.strict && ok != trace_len ? kExitRejected : kExitOk;
}

int attack(const Common& c, const std::string& scenario, std::size_t n, std::ostream& out)
{
    RunConfig cfg = resolve(c);
    std::vector<std::string> names;
    if (scenario == "all") {
        names = scenario_names();
    } else {
        const auto& known = scenario_names();
        if (std::find(known.begin(), known.end(), scenario) == known.end()) {
            throw ConfigError("unknown scenario '" + scenario + "'");
        }
        names.push_back(scenario);
    }
    bool any_success = false;
    for (const std::string& name : names) {
        const AttackReport r = run_scenario(name, cfg.world, n, cfg.seed());
        out << format_report(r) << "\n";
        any_success = any_success || r.successes > 0;
    }
    return c.strict && any_success ? kExitRejected : kExitOk;
}

int bench(const Common& c, const std::vector<std::string>& approaches, const std::vector<std::size_t>& cells,
          std::size_t laps, std::size_t jobs, std::size_t entropy_samples, const std::optional<std::string>& out_path,
          bool no_wall, std::ostream& out)
{
    RunConfig cfg = resolve(c);
    BenchConfig b;
    b.world = cfg.world;
    b.seed = cfg.seed();
    b.cells = cells;
    b.trace_len_per_cell = laps;
    b.jobs = jobs;
    b.approaches.clear();
    for (const std::string& name : approaches) {
        auto a = parse_approach(name);
        if (!a) {
            throw ConfigError("unknown approach '" + name + "'");
        }
        b.approaches.push_back(*a);
    }
    const CostTable table = run_comparison(b);
    const std::string csv = format_csv(table, !no_wall);
    if (out_path) {
        std::ofstream f(*out_path, std::ios::binary | std::ios::trunc);
        if (!f || !(f << csv)) {
            throw BenchError("cannot write " + *out_path);
        }
        out << "bench seed=" << b.seed << " rows=" << table.rows.size() << " out=" << *out_path << "\n";
    } else {
        out << csv;
    }
    std::size_t failures = 0;
    for (const CostRow& r : table.rows) {
        failures += r.failures;
        out << "row approach=" << to_string(r.approach) << " cells=" << r.cells << " handovers=" << r.handovers
            << " full=" << r.full_auths << " fast=" << r.fast_paths << " zones=" << r.zones_visited
            << " failures=" << r.failures << " ops=" << r.counters.total_ops() << "\n";
    }
    if (entropy_samples > 0) {
        Rng rng = Rng(b.seed).fork("entropy");
        out << format_entropy(key_entropy_report(cfg.world.env, entropy_samples, rng));
    }
    return c.strict && failures > 0 ? kExitRejected : kExitOk;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Cross-layer small-cell authentication simulator"};
    app.name("xlayer");
    app.require_subcommand(1);

    Common gen_c, auth_c, attack_c, bench_c;

    auto* gen = app.add_subcommand("gen-map", "Synthesize the radio map and write it to a file");
    add_common(gen, gen_c, false);
    std::string gen_out;
    gen->add_option("--out", gen_out, "Output file")->required();

    auto* auth = app.add_subcommand("run-auth", "Walk one mobile across the cells and authenticate at each");
    add_common(auth, auth_c, true);
    std::optional<std::string> sla;
    std::optional<double> drop;
    std::size_t trace_len = 16;
    auth->add_option("--sla", sla, "centralized | decentralized")
        ->check(CLI::IsMember({"centralized", "decentralized"}));
    auth->add_option("--drop-rate", drop, "Loss probability on both radio directions");
    auth->add_option("--trace-len", trace_len, "Number of handovers")->check(CLI::PositiveNumber);

    auto* atk = app.add_subcommand("attack", "Run an attack scenario and print its report");
    add_common(atk, attack_c, true);
    std::string scenario;
    std::size_t n = 1000;
    std::vector<std::string> allowed = scenario_names();
    allowed.push_back("all");
    atk->add_option("--scenario", scenario, "Scenario name or 'all'")->required()->check(CLI::IsMember(allowed));
    atk->add_option("--n", n, "Attempts (flood size for dos-*)")->check(CLI::PositiveNumber);
    std::size_t atk_jobs = 1;
    atk->add_option("--jobs", atk_jobs, "Accepted for symmetry; scenarios run in order");

    auto* bn = app.add_subcommand("bench", "Cost comparison across approaches and cell counts");
    add_common(bn, bench_c, true);
    std::vector<std::string> approaches;
    for (Approach a : all_approaches()) {
        approaches.emplace_back(to_string(a));
    }
    std::vector<std::size_t> cells = {2, 4, 8, 16};
    std::size_t laps = 1;
    std::size_t jobs = 1;
    std::size_t entropy_samples = 1000;
    std::optional<std::string> bench_out;
    bool no_wall = false;
    bn->add_option("--approaches", approaches, "Comma-separated approaches")->delimiter(',');
    bn->add_option("--cells", cells, "Comma-separated cell counts")->delimiter(',');
    bn->add_option("--trace-len", laps, "Laps over the visited cells")->check(CLI::PositiveNumber);
    bn->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    bn->add_option("--entropy-samples", entropy_samples, "Positions for the key entropy report (0 skips it)");
    bn->add_option("--out", bench_out, "CSV output file (stdout when absent)");
    bn->add_flag("--no-wall", no_wall, "Write 0 in the wall_ns column");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) {
            return gen_map(gen_c, gen_out, out);
        }
        if (*auth) {
            return run_auth(auth_c, sla, drop, trace_len, out);
        }
        if (*atk) {
            return attack(attack_c, scenario, n, out);
        }
        if (*bn) {
            return bench(bench_c, approaches, cells, laps, jobs, entropy_samples, bench_out, no_wall, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const TrustedZoneError& e) {
        err << "radio map error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BenchError& e) {
        err << "bench error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace xlayer::cli
