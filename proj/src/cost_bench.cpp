#include "xlayer/cost_bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace xlayer {

const char* to_string(Approach a)
{
    switch (a) {
    case Approach::NonCrypto:
        return "non-crypto";
    case Approach::CryptoOnly:
        return "crypto-only";
    case Approach::CrossLayerNoZones:
        return "cross-layer-no-zones";
    case Approach::CrossLayerZones:
        return "cross-layer-zones";
    }
    return "unknown";
}

std::optional<Approach> parse_approach(std::string_view name)
{
    for (Approach a : all_approaches()) {
        if (name == to_string(a)) {
            return a;
        }
    }
    return std::nullopt;
}

const std::vector<Approach>& all_approaches()
{
    static const std::vector<Approach> all = {Approach::NonCrypto, Approach::CryptoOnly,
                                              Approach::CrossLayerNoZones, Approach::CrossLayerZones};
    return all;
}

const CostRow* CostTable::find(Approach a, std::size_t cells) const
{
    for (const CostRow& r : rows) {
        if (r.approach == a && r.cells == cells) {
            return &r;
        }
    }
    return nullptr;
}

namespace {

ProtocolParams params_for(Approach a, ProtocolParams p)
{
    switch (a) {
    case Approach::NonCrypto:
        p.scheme = AuthScheme::NonCrypto;
        p.zone_cache = false;
        break;
    case Approach::CryptoOnly:
        p.scheme = AuthScheme::CryptoOnly;
        p.zone_cache = false;
        break;
    case Approach::CrossLayerNoZones:
        p.scheme = AuthScheme::CrossLayer;
        p.zone_cache = false;
        break;
    case Approach::CrossLayerZones:
        p.scheme = AuthScheme::CrossLayer;
        p.zone_cache = true;
        break;
    }
    return p;
}

CostRow replay_trace(Approach a, std::size_t cells, const WorldConfig& base, const MobilityTrace& trace)
{
    WorldConfig cfg = base;
    cfg.protocol = params_for(a, base.protocol);
    cfg.subscribers = 1;
    World w = World::build(cfg);

    CostRow row;
    row.approach = a;
    row.cells = cells;
    std::set<std::uint32_t> zones;
    const std::uint64_t t0 = w.now();
    for (const TraceEntry& step : trace) {
        if (t0 + step.time_ns > w.now()) {
            w.advance(t0 + step.time_ns - w.now());
        }
        w.place_mt(1, step.position);
        zones.insert(step.zone_id);
        const SessionVerdict v = handover(w, 1, cfg.protocol.sla);
        ++row.handovers;
        if (v.outcome == Outcome::FastPathSuccess) {
            ++row.fast_paths;
        } else {
            ++row.full_auths;
            if (v.outcome != Outcome::MutualAuthSuccess) {
                ++row.failures;
            }
        }
        row.counters += v.counters;
    }
    row.zones_visited = zones.size();
    return row;
}

} // namespace

CostTable run_comparison(const BenchConfig& cfg)
{
    if (cfg.approaches.empty() || cfg.cells.empty()) {
        throw BenchError("bench needs at least one approach and one cell count");
    }
    if (cfg.trace_len_per_cell == 0) {
        throw BenchError("trace length per cell must be positive");
    }
    std::vector<std::size_t> cells = cfg.cells;
    std::sort(cells.begin(), cells.end());
    cells.erase(std::unique(cells.begin(), cells.end()), cells.end());

    // One shared map and threshold; the worlds below only differ in protocol settings.
    WorldConfig base = cfg.world;
    base.env.seed = cfg.seed;
    World reference = World::build(base);
    base.radio_map = reference.radio_map_handle();
    base.protocol.epsilon = reference.epsilon();
    const auto& sites = reference.sites();
    for (std::size_t c : cells) {
        if (c == 0 || c > sites.size()) {
            throw BenchError("cell count " + std::to_string(c) + " outside 1.." + std::to_string(sites.size()));
        }
    }

    std::vector<MobilityTrace> traces;
    for (std::size_t c : cells) {
        Rng rng = Rng(cfg.seed).fork("trace-" + std::to_string(c));
        MobilityTrace trace;
        for (std::size_t lap = 0; lap < cfg.trace_len_per_cell; ++lap) {
            const std::uint64_t start = lap * c * cfg.dwell_ns;
            MobilityTrace part = generate_mobility_trace(sites, c, cfg.dwell_ns, rng, start);
            trace.insert(trace.end(), part.begin(), part.end());
        }
        traces.push_back(std::move(trace));
    }

    struct Job {
        Approach approach;
        std::size_t cell_index;
    };
    std::vector<Job> jobs;
    for (Approach a : cfg.approaches) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            jobs.push_back(Job{a, i});
        }
    }
    CostTable table;
    table.rows.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job& job = jobs[j];
            table.rows[j] = replay_trace(job.approach, cells[job.cell_index], base, traces[job.cell_index]);
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(cfg.jobs, 1, jobs.size());
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }
    return table;
}

std::string format_csv(const CostTable& table, bool include_wall)
{
    std::ostringstream os;
    os << "approach,cells,cipher_block_ops,prf_calls,knn_distance_evals,messages,bytes,wall_ns\n";
    for (const CostRow& r : table.rows) {
        const CostCounters& c = r.counters;
        os << to_string(r.approach) << ',' << r.cells << ',' << c.cipher_block_ops << ',' << c.prf_calls << ','
           << c.knn_distance_evals << ',' << c.messages_sent << ',' << c.bytes_sent << ','
           << (include_wall ? c.wall_ns : 0) << '\n';
    }
    return os.str();
}

void emit_csv(const CostTable& table, const std::filesystem::path& path)
{
    if (table.rows.empty()) {
        throw BenchError("refusing to write an empty cost table");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw BenchError("cannot open " + path.string() + " for writing");
    }
    out << format_csv(table);
    out.flush();
    if (!out) {
        throw BenchError("write to " + path.string() + " failed");
    }
}

double shannon_entropy_bits(const std::map<std::int32_t, std::size_t>& histogram)
{
    std::size_t total = 0;
    for (const auto& [value, n] : histogram) {
        total += n;
    }
    if (total == 0) {
        return 0.0;
    }
    double h = 0.0;
    for (const auto& [value, n] : histogram) {
        if (n == 0) {
            continue;
        }
        const double p = static_cast<double>(n) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h == 0.0 ? 0.0 : h;  // avoid printing -0
}

EntropyReport key_entropy_report(const EnvironmentConfig& env, std::size_t sample_positions, Rng& rng,
                                 std::optional<Position> fixed)
{
    env.validate();
    const std::vector<AccessPoint> aps = default_access_points();
    const std::vector<Position> grid = default_survey_grid();
    double lo_x = grid.front().x, hi_x = grid.front().x, lo_y = grid.front().y, hi_y = grid.front().y;
    for (const Position& p : grid) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    EntropyReport r;
    r.sigma_db = env.shadowing_sigma_cdbm / 100.0;
    for (std::size_t i = 0; i < sample_positions; ++i) {
        const Position p = fixed ? *fixed : Position{rng.uniform(lo_x, hi_x), rng.uniform(lo_y, hi_y)};
        SampleOptions opts;
        opts.emit_ns = kSurveyEpochNs;
        try {
            const RssVector v = sample_rss_vector(p, aps, env, rng, opts);
            ++r.histogram[mean_rss(v)];
            ++r.samples;
        } catch (const RadioError&) {
            // no AP in range: nothing to derive a key from
        }
    }
    r.entropy_bits = shannon_entropy_bits(r.histogram);
    return r;
}

std::string format_entropy(const EntropyReport& r)
{
    std::ostringstream os;
    os << "key entropy: sigma_db=" << r.sigma_db << " samples=" << r.samples
       << " distinct_means=" << r.histogram.size() << " entropy_bits=" << r.entropy_bits << "\n";
    return os.str();
}

} // namespace xlayer
