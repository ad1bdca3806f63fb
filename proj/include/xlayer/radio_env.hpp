#pragma once

#include "xlayer/rng.hpp"
#include "xlayer/types.hpp"
#include "xlayer/wire_codec.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xlayer {

inline constexpr double kSpeedOfLightMPerNs = 0.299792458;

struct AccessPoint {
    std::uint32_t ap_id = 0;
    Position position;
    std::int32_t tx_power_cdbm = 2000;
    std::uint32_t cell_id = 0;
};

struct EnvironmentConfig {
    double path_loss_exponent = 3.0;
    double reference_distance_m = 1.0;
    std::int32_t reference_loss_cdbm = 4000;
    std::int32_t shadowing_sigma_cdbm = 400;
    std::uint64_t toa_jitter_ns = 20;
    std::int32_t noise_floor_cdbm = -9500;
    std::uint64_t seed = 1;

    void validate() const;
};

// Applies `key = value` entries whose keys name EnvironmentConfig fields.
// Keys that are not environment fields are left for other consumers.
void apply_environment_keys(const std::map<std::string, std::string>& kv, EnvironmentConfig& cfg);

class RadioError : public std::runtime_error {
public:
    enum class Kind { ZeroDistance, NoApInRange, InvalidConfig, EmptyInput, TooManyCells };

    RadioError(Kind kind, const std::string& what)
        : std::runtime_error(what)
        , kind_(kind)
    {
    }

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

void validate_access_points(const std::vector<AccessPoint>& aps);

// Deterministic per-(AP, orientation) RSS offset in [-300, +300] cdBm.
std::int32_t orientation_offset_cdbm(std::uint32_t ap_id, std::uint32_t orientation);

struct SampleOptions {
    std::uint64_t emit_ns = 0;                 // transmit time added to the propagation delay
    std::optional<std::uint32_t> orientation;  // receiver orientation, if modeled
};

RssReading rss_at(Position pos, const AccessPoint& ap, const EnvironmentConfig& cfg, Rng& rng,
                  const SampleOptions& opts = {});

RssVector sample_rss_vector(Position pos, const std::vector<AccessPoint>& aps,
                            const EnvironmentConfig& cfg, Rng& rng, const SampleOptions& opts = {});

struct SurveySample {
    Position position;
    std::uint32_t orientation = 0;
    RssVector rss;
};

inline constexpr std::uint64_t kSurveyEpochNs = 1'000'000'000ULL;
inline constexpr std::uint64_t kSurveySpacingNs = 1'000'000ULL;

std::vector<SurveySample> synthesize_radio_map(const std::vector<Position>& grid,
                                               std::uint32_t orientations,
                                               std::uint32_t samples_per_combo,
                                               const std::vector<AccessPoint>& aps,
                                               const EnvironmentConfig& cfg, Rng& rng);

struct TraceEntry {
    std::uint64_t time_ns = 0;
    Position position;
    std::uint32_t cell_id = 0;
    std::uint32_t zone_id = 0;
};

using MobilityTrace = std::vector<TraceEntry>;

// A cell the mobile can be served by, with the surveyed positions it may stand at.
struct CellSite {
    std::uint32_t cell_id = 0;
    std::uint32_t zone_id = 0;
    std::vector<Position> anchors;
};

// Visits the first `cells_visited` sites in order, dwelling `dwell_ns` in each.
MobilityTrace generate_mobility_trace(const std::vector<CellSite>& sites, std::size_t cells_visited,
                                      std::uint64_t dwell_ns, Rng& rng, std::uint64_t start_ns = 0);

// Default deployment: 16 small cells on a 4x4 lattice with 50 m spacing over a
// 200 m x 200 m area, one AP per cell. Cell ids are numbered so that every
// run of four consecutive ids forms a 2x2 block (one quadrant of the area).
std::vector<AccessPoint> default_access_points();

// Default survey lattice: 10 x 7 = 70 positions, kept 40 m clear of the
// quadrant borders so neighboring zones do not share near-identical fingerprints.
std::vector<Position> default_survey_grid();

inline constexpr std::uint32_t kDefaultOrientations = 4;
inline constexpr std::uint32_t kDefaultSamplesPerCombo = 25;

// Cell of the AP nearest to `pos` (lowest ap_id on ties).
std::uint32_t serving_cell(Position pos, const std::vector<AccessPoint>& aps);

} // namespace xlayer
