#include "world_fixture.hpp"

#include "xlayer/cost_bench.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace xlayer {
namespace {

BenchConfig small_bench()
{
    BenchConfig b;
    b.world = testworld::base();
    b.seed = 3;
    return b;
}

const CostTable& shared_table()
{
    static const CostTable t = run_comparison(small_bench());
    return t;
}

TEST(Approaches, ParseRoundTrip)
{
    for (Approach a : all_approaches()) {
        EXPECT_EQ(parse_approach(to_string(a)), a);
    }
    EXPECT_FALSE(parse_approach("zones").has_value());
    EXPECT_EQ(all_approaches().size(), 4u);
}

TEST(Comparison, Shape)
{
    const CostTable& t = shared_table();
    ASSERT_EQ(t.rows.size(), 16u);
    const std::string csv = format_csv(t, false);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "approach,cells,cipher_block_ops,prf_calls,knn_distance_evals,messages,bytes,wall_ns");
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        EXPECT_EQ(line.substr(line.rfind(',')), ",0");
    }
    EXPECT_EQ(n, 16u);
    for (const CostRow& r : t.rows) {
        EXPECT_EQ(r.failures, 0u) << to_string(r.approach) << " " << r.cells;
        EXPECT_EQ(r.handovers, r.cells);
        EXPECT_EQ(r.full_auths + r.fast_paths, r.handovers);
    }
}

TEST(Comparison, Orderings)
{
    const CostTable& t = shared_table();
    std::uint64_t prev_gap = 0;
    for (std::size_t cells : {2u, 4u, 8u, 16u}) {
        const auto* none = t.find(Approach::NonCrypto, cells);
        const auto* crypto = t.find(Approach::CryptoOnly, cells);
        const auto* nz = t.find(Approach::CrossLayerNoZones, cells);
        const auto* z = t.find(Approach::CrossLayerZones, cells);
        ASSERT_TRUE(none && crypto && nz && z);
        EXPECT_GT(nz->counters.total_ops(), crypto->counters.total_ops());
        EXPECT_GT(nz->counters.total_ops(), none->counters.total_ops());
        EXPECT_LT(z->counters.total_ops(), nz->counters.total_ops());
        const std::uint64_t gap = nz->counters.total_ops() - crypto->counters.total_ops();
        EXPECT_GE(gap, prev_gap);
        prev_gap = gap;
        EXPECT_EQ(z->full_auths, z->zones_visited);
        EXPECT_EQ(z->fast_paths, cells - z->zones_visited);
        EXPECT_EQ(nz->full_auths, cells);
    }
}

TEST(Comparison, ZoneEconomyInOneZone)
{
    BenchConfig b = small_bench();
    b.approaches = {Approach::CrossLayerZones};
    b.cells = {4};
    const CostTable t = run_comparison(b);
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0].zones_visited, 1u);
    EXPECT_EQ(t.rows[0].full_auths, 1u);
    EXPECT_EQ(t.rows[0].fast_paths, 3u);
}

TEST(Comparison, Laps)
{
    BenchConfig b = small_bench();
    b.approaches = {Approach::CrossLayerZones};
    b.cells = {8};
    b.trace_len_per_cell = 3;
    const CostTable t = run_comparison(b);
    EXPECT_EQ(t.rows[0].handovers, 24u);
    // the cache outlives three laps at 30 s dwell
    EXPECT_EQ(t.rows[0].full_auths, 2u);
}

TEST(Comparison, DeterministicAcrossJobs)
{
    BenchConfig b = small_bench();
    b.cells = {2, 8};
    b.jobs = 1;
    const std::string one = format_csv(run_comparison(b), false);
    b.jobs = 3;
    EXPECT_EQ(format_csv(run_comparison(b), false), one);
}

TEST(Comparison, Errors)
{
    BenchConfig b = small_bench();
    b.approaches.clear();
    EXPECT_THROW(run_comparison(b), BenchError);
    b = small_bench();
    b.cells.clear();
    EXPECT_THROW(run_comparison(b), BenchError);
    b = small_bench();
    b.trace_len_per_cell = 0;
    EXPECT_THROW(run_comparison(b), BenchError);
    EXPECT_THROW(emit_csv(CostTable{}, std::filesystem::temp_directory_path() / "xlayer_empty.csv"), BenchError);
}

TEST(Comparison, EmitCsv)
{
    const auto path = std::filesystem::temp_directory_path() / "xlayer_bench_test.csv";
    emit_csv(shared_table(), path);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), format_csv(shared_table(), true));
    std::filesystem::remove(path);
}

TEST(Entropy, Shannon)
{
    EXPECT_DOUBLE_EQ(shannon_entropy_bits({}), 0.0);
    EXPECT_DOUBLE_EQ(shannon_entropy_bits({{1, 10}}), 0.0);
    EXPECT_DOUBLE_EQ(shannon_entropy_bits({{1, 5}, {2, 5}}), 1.0);
    EXPECT_DOUBLE_EQ(shannon_entropy_bits({{1, 1}, {2, 1}, {3, 1}, {4, 1}}), 2.0);
    EXPECT_NEAR(shannon_entropy_bits({{1, 3}, {2, 1}}), 0.8112781244591328, 1e-12);
}

TEST(Entropy, FixedPositionNoShadowing)
{
    EnvironmentConfig env;
    env.shadowing_sigma_cdbm = 0;
    Rng rng(701);
    const EntropyReport r = key_entropy_report(env, 200, rng, Position{100.0, 100.0});
    EXPECT_EQ(r.samples, 200u);
    EXPECT_EQ(r.histogram.size(), 1u);
    EXPECT_DOUBLE_EQ(r.entropy_bits, 0.0);
}

TEST(Entropy, GrowsWithShadowing)
{
    EnvironmentConfig quiet;
    quiet.shadowing_sigma_cdbm = 100;
    EnvironmentConfig loud;
    loud.shadowing_sigma_cdbm = 800;
    Rng a(702), b(702);
    const Position p{100.0, 100.0};
    EXPECT_LT(key_entropy_report(quiet, 2000, a, p).entropy_bits, key_entropy_report(loud, 2000, b, p).entropy_bits);
}

TEST(Entropy, FormatLine)
{
    EntropyReport r;
    r.samples = 2;
    r.sigma_db = 4;
    r.histogram = {{-6000, 1}, {-6001, 1}};
    r.entropy_bits = 1;
    EXPECT_EQ(format_entropy(r), "key entropy: sigma_db=4 samples=2 distinct_means=2 entropy_bits=1\n");
}

} // namespace
} // namespace xlayer
