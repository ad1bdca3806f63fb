#include "knn_oracle.hpp"

#include "xlayer/protocol.hpp"
#include "xlayer/trusted_zone.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

namespace xlayer {
namespace {

constexpr std::int32_t kFloor = -9500;

TrustedZoneError::Kind tz_kind(const std::function<void()>& fn, std::size_t* line = nullptr)
{
    try {
        fn();
    } catch (const TrustedZoneError& e) {
        if (line != nullptr) {
            *line = e.line();
        }
        return e.kind();
    }
    ADD_FAILURE() << "no TrustedZoneError thrown";
    return TrustedZoneError::Kind::Io;
}

RadioMapRecord record(std::uint32_t zone, std::vector<std::int32_t> rss)
{
    RadioMapRecord r;
    r.zone_id = zone;
    r.cell_id = zone + 1;
    std::uint32_t ap = 1;
    for (std::int32_t x : rss) {
        r.rss.readings.push_back({ap++, x, 1});
    }
    return r;
}

RadioMap small_map()
{
    WorldConfig cfg;
    cfg.samples_per_combo = 1;
    return synthesize_world_map(cfg);
}

void expect_same_as_brute(const RssVector& q, const RadioMap& db, std::size_t k)
{
    const MatchResult m = knn_match(q, db, k, kFloor);
    const auto b = testoracle::brute_knn(q, db, k, kFloor);
    ASSERT_EQ(m.neighbors.size(), b.indices.size());
    for (std::size_t i = 0; i < b.indices.size(); ++i) {
        EXPECT_EQ(m.neighbors[i].record_index, b.indices[i]) << "rank " << i;
        EXPECT_EQ(m.neighbors[i].distance, b.distances[i]) << "rank " << i;
        EXPECT_EQ(m.neighbors[i].zone_id, db[b.indices[i]].zone_id);
    }
    EXPECT_EQ(m.k_dh, b.distances.front());
    EXPECT_EQ(m.matched_zone, b.zone);
    EXPECT_EQ(m.matched_location, db[b.indices.front()].location);
}

TEST(Knn, IdenticalRecordIsNearest)
{
    const RadioMap db = small_map();
    const MatchResult m = knn_match(db[17].rss, db, 3, kFloor);
    EXPECT_EQ(m.k_dh, 0.0);
    EXPECT_EQ(m.neighbors.front().record_index, 17u);
}

TEST(Knn, TwoRecordExample)
{
    const RadioMap db = {record(0, {-6000, -7000}), record(1, {-8000, -9000})};
    RssVector q;
    q.readings = {{1, -6100, 1}, {2, -7000, 1}};
    const MatchResult m = knn_match(q, db, 1, kFloor);
    EXPECT_EQ(m.neighbors.front().record_index, 0u);
    EXPECT_EQ(m.k_dh, 100.0);
    EXPECT_EQ(m.matched_zone, 0u);
}

TEST(Knn, MissingApImputedAtFloor)
{
    const RadioMap db = {record(0, {-6000, -7000})};
    RssVector q;
    q.readings = {{1, -6000, 1}};
    // AP 2 missing from the query: (-7000 - -9500)^2
    EXPECT_EQ(knn_match(q, db, 1, kFloor).k_dh, 2500.0);
    std::size_t shared = 0;
    EXPECT_EQ(squared_rss_distance(q, db[0].rss, kFloor, &shared), 2500LL * 2500);
    EXPECT_EQ(shared, 1u);
}

TEST(Knn, TiesBrokenByIndex)
{
    const RadioMap db = {record(1, {-6000}), record(0, {-6000}), record(0, {-6000})};
    RssVector q;
    q.readings = {{1, -6000, 1}};
    const MatchResult m = knn_match(q, db, 3, kFloor);
    EXPECT_EQ(m.neighbors[0].record_index, 0u);
    EXPECT_EQ(m.neighbors[1].record_index, 1u);
    EXPECT_EQ(m.neighbors[2].record_index, 2u);
    EXPECT_EQ(m.matched_zone, 0u);  // 2 votes to 1
}

TEST(Knn, VoteTieGoesToNearest)
{
    const RadioMap db = {record(5, {-6100}), record(6, {-6000}), record(7, {-6200})};
    RssVector q;
    q.readings = {{1, -6000, 1}};
    EXPECT_EQ(knn_match(q, db, 3, kFloor).matched_zone, 6u);
}

TEST(Knn, Errors)
{
    RssVector q;
    q.readings = {{1, -6000, 1}};
    EXPECT_EQ(tz_kind([&] { knn_match(q, RadioMap{}, 3, kFloor); }), TrustedZoneError::Kind::EmptyDatabase);
    EXPECT_EQ(tz_kind([&] { knn_match(q, {record(0, {-6000})}, 0, kFloor); }),
              TrustedZoneError::Kind::InvalidArgument);
    RssVector disjoint;
    disjoint.readings = {{9, -6000, 1}};
    EXPECT_EQ(tz_kind([&] { knn_match(disjoint, {record(0, {-6000})}, 1, kFloor); }),
              TrustedZoneError::Kind::AllImputed);
}

TEST(Knn, KLargerThanDatabase)
{
    const RadioMap db = {record(0, {-6000}), record(1, {-7000})};
    RssVector q;
    q.readings = {{1, -6500, 1}};
    EXPECT_EQ(knn_match(q, db, 5, kFloor).neighbors.size(), 2u);
}

TEST(Knn, MatchesBruteForceOnSmallMap)
{
    const RadioMap db = small_map();
    ASSERT_EQ(db.size(), 280u);
    const auto aps = default_access_points();
    Rng rng(404);
    for (int i = 0; i < 50; ++i) {
        const Position p{rng.uniform(0, 200), rng.uniform(0, 200)};
        const RssVector q = sample_rss_vector(p, aps, EnvironmentConfig{}, rng);
        expect_same_as_brute(q, db, 3);
    }
}

TEST(Knn, MatchesBruteForceAcrossK)
{
    const RadioMap db = small_map();
    const auto aps = default_access_points();
    Rng rng(405);
    for (std::size_t k : {1u, 2u, 4u, 5u, 9u}) {
        for (int i = 0; i < 20; ++i) {
            const Position p{rng.uniform(0, 200), rng.uniform(0, 200)};
            expect_same_as_brute(sample_rss_vector(p, aps, EnvironmentConfig{}, rng), db, k);
        }
    }
}

TEST(Knn, KdhIsMinimumAndNeighborsSorted)
{
    const RadioMap db = small_map();
    const auto aps = default_access_points();
    Rng rng(406);
    for (int i = 0; i < 50; ++i) {
        const RssVector q = sample_rss_vector({rng.uniform(0, 200), rng.uniform(0, 200)}, aps, EnvironmentConfig{}, rng);
        const MatchResult m = knn_match(q, db, 5, kFloor);
        EXPECT_EQ(m.k_dh, m.neighbors.front().distance);
        for (std::size_t j = 1; j < m.neighbors.size(); ++j) {
            EXPECT_LE(m.neighbors[j - 1].distance, m.neighbors[j].distance);
        }
    }
}

TEST(Knn, SoundAtMappedLocationWithoutShadowing)
{
    WorldConfig cfg;
    cfg.env.shadowing_sigma_cdbm = 0;
    cfg.samples_per_combo = 1;
    const RadioMap db = synthesize_world_map(cfg);
    const auto aps = default_access_points();
    Rng rng(407);
    for (int i = 0; i < 30; ++i) {
        const RadioMapRecord& r = db[rng.below(db.size())];
        SampleOptions opts;
        opts.orientation = r.orientation;
        opts.emit_ns = 12345;
        const RssVector q = sample_rss_vector(r.location, aps, cfg.env, rng, opts);
        const MatchResult m = knn_match(q, db, 3, cfg.env.noise_floor_cdbm);
        EXPECT_EQ(m.k_dh, 0.0);
        EXPECT_EQ(m.matched_location, r.location);
    }
}

TEST(Legitimacy, Rules)
{
    MatchResult m;
    m.k_dh = 0.0;
    m.matched_zone = 2;
    EXPECT_TRUE(zone_legitimacy(m, 2, 100.0));
    EXPECT_FALSE(zone_legitimacy(m, 1, 100.0));
    m.k_dh = 100.5;
    EXPECT_FALSE(zone_legitimacy(m, 2, 100.0));
    EXPECT_TRUE(zone_legitimacy(m, 2, 100.5));
    EXPECT_EQ(tz_kind([&] { zone_legitimacy(m, 2, 0.0); }), TrustedZoneError::Kind::InvalidArgument);
}

TEST(Legitimacy, MonotoneInEpsilon)
{
    Rng rng(408);
    for (int i = 0; i < 500; ++i) {
        MatchResult m;
        m.k_dh = rng.uniform(0, 5000);
        m.matched_zone = static_cast<std::uint32_t>(rng.below(3));
        const std::uint32_t claimed = static_cast<std::uint32_t>(rng.below(3));
        const double eps = rng.uniform(1, 5000);
        if (zone_legitimacy(m, claimed, eps)) {
            EXPECT_TRUE(zone_legitimacy(m, claimed, eps + rng.uniform(0, 1000)));
        }
    }
}

TEST(ZoneTableTest, FourCellsTwoPerZone)
{
    const ZoneTable t = build_zone_table({4, 2, 3, 1}, 2);
    EXPECT_EQ(t.zone_of(1), 0u);
    EXPECT_EQ(t.zone_of(2), 0u);
    EXPECT_EQ(t.zone_of(3), 1u);
    EXPECT_EQ(t.zone_of(4), 1u);
    EXPECT_EQ(t.cells_in(1), (std::vector<std::uint32_t>{3, 4}));
    EXPECT_EQ(t.zone_count(), 2u);
    EXPECT_TRUE(t.warnings.empty());
}

TEST(ZoneTableTest, Remainder)
{
    const ZoneTable t = build_zone_table({1, 2, 3, 4, 5}, 2);
    EXPECT_EQ(t.cells_in(2), (std::vector<std::uint32_t>{5}));
    EXPECT_EQ(t.warnings.size(), 1u);
}

TEST(ZoneTableTest, Errors)
{
    EXPECT_EQ(tz_kind([] { build_zone_table({1, 2}, 1); }), TrustedZoneError::Kind::InvalidArgument);
    EXPECT_EQ(tz_kind([] { build_zone_table({}, 2); }), TrustedZoneError::Kind::InvalidArgument);
    EXPECT_EQ(tz_kind([] { build_zone_table({1, 2}, 2).zone_of(9); }), TrustedZoneError::Kind::InvalidArgument);
}

TEST(ZoneTableTest, EveryCellExactlyOneZone)
{
    const ZoneTable t = default_zone_table(4);
    std::size_t total = 0;
    for (std::uint32_t z : t.zone_ids()) {
        total += t.cells_in(z).size();
    }
    EXPECT_EQ(total, t.cells().size());
    EXPECT_EQ(t.cells().size(), 16u);
    EXPECT_EQ(t.zone_count(), 4u);
}

TEST(Persistence, RoundTripFullMap)
{
    const RadioMap db = synthesize_world_map(WorldConfig{});
    ASSERT_EQ(db.size(), 7000u);
    const auto path = std::filesystem::temp_directory_path() / "xlayer_roundtrip_map.txt";
    save_radio_map(db, path);
    EXPECT_EQ(load_radio_map(path), db);
    std::filesystem::remove(path);
    EXPECT_EQ(parse_radio_map(format_radio_map(db)), db);
}

TEST(Persistence, LineFormat)
{
    RadioMapRecord r = record(1, {-6000, -7000});
    r.location = {8, 34.5};
    r.orientation = 2;
    const std::string text = format_radio_map({r});
    EXPECT_EQ(text, "xlayer-radiomap v1\n1,2,8,34.5,2,1:-6000:1;2:-7000:1\n");
}

TEST(Persistence, VersionMismatch)
{
    EXPECT_EQ(tz_kind([] { parse_radio_map("xlayer-radiomap v2\n"); }), TrustedZoneError::Kind::VersionMismatch);
}

TEST(Persistence, MissingFieldNamesLine)
{
    std::size_t line = 0;
    EXPECT_EQ(tz_kind([] { parse_radio_map("xlayer-radiomap v1\n0,1,8,8,0,1:-6000:1\n0,1,8,8,1:-6000:1\n"); }, &line),
              TrustedZoneError::Kind::ParseError);
    EXPECT_EQ(line, 3u);
}

TEST(Persistence, MissingFile)
{
    EXPECT_EQ(tz_kind([] { load_radio_map("/nonexistent/dir/map.txt"); }), TrustedZoneError::Kind::Io);
}

TEST(Persistence, ConsistencyCheck)
{
    RadioMap db = synthesize_world_map(WorldConfig{});
    const ZoneTable zones = default_zone_table(4);
    EXPECT_NO_THROW(check_zone_consistency(db, zones));
    db[5].zone_id += 1;
    EXPECT_EQ(tz_kind([&] { check_zone_consistency(db, zones); }), TrustedZoneError::Kind::Inconsistent);
}

TEST(Calibration, Percentile)
{
    EXPECT_EQ(percentile({5, 1, 4, 2, 3}, 0.5), 3.0);
    EXPECT_EQ(percentile({5, 1, 4, 2, 3}, 1.0), 5.0);
    std::vector<double> hundred;
    for (int i = 1; i <= 100; ++i) {
        hundred.push_back(i);
    }
    EXPECT_EQ(percentile(hundred, 0.99), 99.0);
    EXPECT_EQ(tz_kind([] { percentile({}, 0.5); }), TrustedZoneError::Kind::InvalidArgument);
    EXPECT_EQ(tz_kind([] { percentile({1}, 0.0); }), TrustedZoneError::Kind::InvalidArgument);
}

TEST(Calibration, SweepRates)
{
    const std::vector<MatchSample> legit = {{100, true}, {200, true}, {300, false}, {400, true}};
    const std::vector<MatchSample> adv = {{150, true}, {250, false}, {500, true}};
    const auto rows = sweep_epsilon(legit, adv, {50, 250, 1000});
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rows[0].false_reject_rate, 1.0);
    EXPECT_DOUBLE_EQ(rows[0].false_accept_rate, 0.0);
    EXPECT_DOUBLE_EQ(rows[1].false_reject_rate, 0.5);
    EXPECT_DOUBLE_EQ(rows[1].false_accept_rate, 1.0 / 3);
    EXPECT_DOUBLE_EQ(rows[2].false_reject_rate, 0.25);
    EXPECT_DOUBLE_EQ(rows[2].false_accept_rate, 2.0 / 3);
}

} // namespace
} // namespace xlayer
