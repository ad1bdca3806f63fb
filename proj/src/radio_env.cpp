#include "xlayer/radio_env.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

namespace xlayer {

void EnvironmentConfig::validate() const
{
    if (!(path_loss_exponent >= 1.5 && path_loss_exponent <= 6.0)) {
        throw RadioError(RadioError::Kind::InvalidConfig, "path_loss_exponent must lie in [1.5, 6]");
    }
    if (!(reference_distance_m > 0.0)) {
        throw RadioError(RadioError::Kind::InvalidConfig, "reference_distance_m must be positive");
    }
    if (shadowing_sigma_cdbm < 0) {
        throw RadioError(RadioError::Kind::InvalidConfig, "shadowing_sigma_cdbm must be >= 0");
    }
    if (noise_floor_cdbm < kRssMinCdbm || noise_floor_cdbm > kRssMaxCdbm) {
        throw RadioError(RadioError::Kind::InvalidConfig, "noise_floor_cdbm outside the RSS range");
    }
}

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw RadioError(RadioError::Kind::InvalidConfig, "bad value for " + key + ": '" + text + "'");
    }
    return value;
}

} // namespace

void apply_environment_keys(const std::map<std::string, std::string>& kv, EnvironmentConfig& cfg)
{
    for (const auto& [key, value] : kv) {
        if (key == "path_loss_exponent") {
            cfg.path_loss_exponent = parse_number<double>(key, value);
        } else if (key == "reference_distance_m") {
            cfg.reference_distance_m = parse_number<double>(key, value);
        } else if (key == "reference_loss_cdbm") {
            cfg.reference_loss_cdbm = parse_number<std::int32_t>(key, value);
        } else if (key == "shadowing_sigma_cdbm") {
            cfg.shadowing_sigma_cdbm = parse_number<std::int32_t>(key, value);
        } else if (key == "toa_jitter_ns") {
            cfg.toa_jitter_ns = parse_number<std::uint64_t>(key, value);
        } else if (key == "noise_floor_cdbm") {
            cfg.noise_floor_cdbm = parse_number<std::int32_t>(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_number<std::uint64_t>(key, value);
        }
    }
    cfg.validate();
}

void validate_access_points(const std::vector<AccessPoint>& aps)
{
    std::set<std::uint32_t> ids;
    for (const AccessPoint& ap : aps) {
        if (!ids.insert(ap.ap_id).second) {
            throw RadioError(RadioError::Kind::InvalidConfig,
                             "duplicate ap_id " + std::to_string(ap.ap_id));
        }
        if (ap.tx_power_cdbm > 3000) {
            throw RadioError(RadioError::Kind::InvalidConfig,
                             "tx power above 30 dBm for ap " + std::to_string(ap.ap_id));
        }
    }
}

std::int32_t orientation_offset_cdbm(std::uint32_t ap_id, std::uint32_t orientation)
{
    const std::uint64_t h =
        splitmix64((static_cast<std::uint64_t>(ap_id) << 32) ^ orientation ^ 0x6f7269656e74ULL);
    return static_cast<std::int32_t>(h % 601) - 300;
}

RssReading rss_at(Position pos, const AccessPoint& ap, const EnvironmentConfig& cfg, Rng& rng,
                  const SampleOptions& opts)
{
    const double d = distance(pos, ap.position);
    if (!(d > 0.0)) {
        throw RadioError(RadioError::Kind::ZeroDistance,
                         "receiver coincides with ap " + std::to_string(ap.ap_id));
    }
    const double loss = cfg.reference_loss_cdbm
        + 1000.0 * cfg.path_loss_exponent * std::log10(d / cfg.reference_distance_m);
    double rss = ap.tx_power_cdbm - loss;
    if (cfg.shadowing_sigma_cdbm > 0) {
        rss += rng.normal(0.0, cfg.shadowing_sigma_cdbm);
    }
    if (opts.orientation) {
        rss += orientation_offset_cdbm(ap.ap_id, *opts.orientation);
    }
    const double clamped = std::clamp(std::round(rss), static_cast<double>(cfg.noise_floor_cdbm),
                                      static_cast<double>(kRssMaxCdbm));

    std::uint64_t toa = opts.emit_ns + static_cast<std::uint64_t>(std::llround(d / kSpeedOfLightMPerNs));
    if (cfg.toa_jitter_ns > 0) {
        toa += rng.below(cfg.toa_jitter_ns + 1);
    }

    RssReading out;
    out.ap_id = ap.ap_id;
    out.rss_cdbm = static_cast<std::int32_t>(clamped);
    out.toa_ns = std::max<std::uint64_t>(toa, 1);
    return out;
}

RssVector sample_rss_vector(Position pos, const std::vector<AccessPoint>& aps,
                            const EnvironmentConfig& cfg, Rng& rng, const SampleOptions& opts)
{
    if (aps.empty()) {
        throw RadioError(RadioError::Kind::EmptyInput, "no access points given");
    }
    std::vector<const AccessPoint*> ordered;
    ordered.reserve(aps.size());
    for (const AccessPoint& ap : aps) {
        ordered.push_back(&ap);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const AccessPoint* a, const AccessPoint* b) { return a->ap_id < b->ap_id; });

    RssVector v;
    for (const AccessPoint* ap : ordered) {
        RssReading r = rss_at(pos, *ap, cfg, rng, opts);
        if (r.rss_cdbm > cfg.noise_floor_cdbm) {
            v.readings.push_back(r);
        }
    }
    if (v.readings.empty()) {
        throw RadioError(RadioError::Kind::NoApInRange, "no AP in range");
    }
    return v;
}

std::vector<SurveySample> synthesize_radio_map(const std::vector<Position>& grid,
                                               std::uint32_t orientations,
                                               std::uint32_t samples_per_combo,
                                               const std::vector<AccessPoint>& aps,
                                               const EnvironmentConfig& cfg, Rng& rng)
{
    if (grid.empty()) {
        throw RadioError(RadioError::Kind::EmptyInput, "survey grid is empty");
    }
    if (orientations == 0 || samples_per_combo == 0) {
        throw RadioError(RadioError::Kind::EmptyInput, "orientation and sample counts must be >= 1");
    }
    std::vector<SurveySample> out;
    out.reserve(grid.size() * orientations * samples_per_combo);
    for (const Position& p : grid) {
        for (std::uint32_t o = 0; o < orientations; ++o) {
            for (std::uint32_t s = 0; s < samples_per_combo; ++s) {
                SampleOptions opts;
                opts.emit_ns = kSurveyEpochNs + out.size() * kSurveySpacingNs;
                opts.orientation = o;
                out.push_back(SurveySample{p, o, sample_rss_vector(p, aps, cfg, rng, opts)});
            }
        }
    }
    return out;
}

MobilityTrace generate_mobility_trace(const std::vector<CellSite>& sites, std::size_t cells_visited,
                                      std::uint64_t dwell_ns, Rng& rng, std::uint64_t start_ns)
{
    if (cells_visited == 0) {
        throw RadioError(RadioError::Kind::EmptyInput, "cells_visited must be >= 1");
    }
    if (cells_visited > sites.size()) {
        throw RadioError(RadioError::Kind::TooManyCells,
                         "requested " + std::to_string(cells_visited) + " cells but only "
                             + std::to_string(sites.size()) + " are available");
    }
    if (dwell_ns == 0) {
        throw RadioError(RadioError::Kind::InvalidConfig, "dwell_ns must be positive");
    }
    MobilityTrace trace;
    trace.reserve(cells_visited);
    for (std::size_t i = 0; i < cells_visited; ++i) {
        const CellSite& site = sites[i];
        if (site.anchors.empty()) {
            throw RadioError(RadioError::Kind::EmptyInput,
                             "cell " + std::to_string(site.cell_id) + " has no anchor positions");
        }
        TraceEntry e;
        e.time_ns = start_ns + i * dwell_ns;
        e.position = site.anchors[rng.below(site.anchors.size())];
        e.cell_id = site.cell_id;
        e.zone_id = site.zone_id;
        trace.push_back(e);
    }
    return trace;
}

std::vector<AccessPoint> default_access_points()
{
    // Quadrant q = (qy * 2 + qx); inside each quadrant the four cells are
    // numbered row-major, so ids 1-4 cover quadrant 0, 5-8 quadrant 1, ...
    std::vector<AccessPoint> aps;
    aps.reserve(16);
    for (std::uint32_t row = 0; row < 4; ++row) {
        for (std::uint32_t col = 0; col < 4; ++col) {
            const std::uint32_t quadrant = (row / 2) * 2 + col / 2;
            const std::uint32_t local = (row % 2) * 2 + col % 2;
            const std::uint32_t id = quadrant * 4 + local + 1;
            AccessPoint ap;
            ap.ap_id = id;
            ap.cell_id = id;
            ap.position = Position{25.0 + 50.0 * col, 25.0 + 50.0 * row};
            ap.tx_power_cdbm = 2000;
            aps.push_back(ap);
        }
    }
    std::sort(aps.begin(), aps.end(),
              [](const AccessPoint& a, const AccessPoint& b) { return a.ap_id < b.ap_id; });
    return aps;
}

std::vector<Position> default_survey_grid()
{
    // Each quadrant keeps its points at least 40 m from the quadrant border.
    static constexpr double kXs[] = {8, 21, 34, 47, 60, 140, 153, 166, 179, 192};
    static constexpr double kYs[] = {8, 34, 60, 140, 157, 175, 192};
    std::vector<Position> grid;
    grid.reserve(70);
    for (double y : kYs) {
        for (double x : kXs) {
            grid.push_back(Position{x, y});
        }
    }
    return grid;
}

std::uint32_t serving_cell(Position pos, const std::vector<AccessPoint>& aps)
{
    if (aps.empty()) {
        throw RadioError(RadioError::Kind::EmptyInput, "no access points given");
    }
    const AccessPoint* best = nullptr;
    double best_d = 0.0;
    for (const AccessPoint& ap : aps) {
        const double d = distance(pos, ap.position);
        if (best == nullptr || d < best_d || (d == best_d && ap.ap_id < best->ap_id)) {
            best = &ap;
            best_d = d;
        }
    }
    return best->cell_id;
}

} // namespace xlayer
