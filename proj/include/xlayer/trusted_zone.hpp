#pragma once

#include "xlayer/radio_env.hpp"
#include "xlayer/types.hpp"
#include "xlayer/wire_codec.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace xlayer {

struct RadioMapRecord {
    Position location;
    std::uint32_t orientation = 0;
    std::uint32_t zone_id = 0;
    std::uint32_t cell_id = 0;
    RssVector rss;

    friend bool operator==(const RadioMapRecord&, const RadioMapRecord&) = default;
};

using RadioMap = std::vector<RadioMapRecord>;

class TrustedZoneError : public std::runtime_error {
public:
    enum class Kind {
        EmptyDatabase,
        InvalidArgument,
        AllImputed,
        VersionMismatch,
        ParseError,
        Io,
        Inconsistent,
    };

    TrustedZoneError(Kind kind, const std::string& what, std::size_t line = 0)
        : std::runtime_error(what)
        , kind_(kind)
        , line_(line)
    {
    }

    Kind kind() const { return kind_; }
    // 1-based line number for parse errors, 0 otherwise.
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::size_t line_;
};

class ZoneTable {
public:
    ZoneTable() = default;

    void assign(std::uint32_t cell_id, std::uint32_t zone_id);

    bool contains(std::uint32_t cell_id) const { return cell_to_zone_.count(cell_id) != 0; }
    // Throws TrustedZoneError(InvalidArgument) for an unknown cell.
    std::uint32_t zone_of(std::uint32_t cell_id) const;
    std::vector<std::uint32_t> cells_in(std::uint32_t zone_id) const;
    std::vector<std::uint32_t> zone_ids() const;
    std::size_t zone_count() const { return zone_ids().size(); }
    const std::map<std::uint32_t, std::uint32_t>& cells() const { return cell_to_zone_; }

    std::vector<std::string> warnings;

private:
    std::map<std::uint32_t, std::uint32_t> cell_to_zone_;
};

// Contiguous grouping in ascending cell_id order; zone ids start at 0. A
// short final zone is kept and reported in `warnings`.
ZoneTable build_zone_table(std::vector<std::uint32_t> cells, std::size_t cells_per_zone);

// Builds map records from survey samples, labeling each with its serving
// cell and that cell's zone.
RadioMap label_survey(const std::vector<SurveySample>& survey, const std::vector<AccessPoint>& aps,
                      const ZoneTable& zones);

// Throws TrustedZoneError(Inconsistent) when a record's zone disagrees with the table.
void check_zone_consistency(const RadioMap& db, const ZoneTable& zones);

struct Neighbor {
    std::size_t record_index = 0;
    double distance = 0.0;  // cdBm units
    std::uint32_t zone_id = 0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct MatchResult {
    double k_dh = 0.0;
    std::vector<Neighbor> neighbors;  // ascending distance, ties by record index
    std::uint32_t matched_zone = 0;
    Position matched_location;

    friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

inline constexpr std::size_t kDefaultK = 3;

// Exact squared distance between two vectors aligned by ap_id. An AP present
// on only one side is compared against the noise floor. `shared` receives
// the number of APs present on both sides.
std::int64_t squared_rss_distance(const RssVector& a, const RssVector& b, std::int32_t noise_floor_cdbm,
                                  std::size_t* shared = nullptr);

MatchResult knn_match(const RssVector& query, const RadioMap& db, std::size_t k,
                      std::int32_t noise_floor_cdbm);

bool zone_legitimacy(const MatchResult& m, std::uint32_t claimed_zone, double epsilon);

void save_radio_map(const RadioMap& db, const std::filesystem::path& path);
RadioMap load_radio_map(const std::filesystem::path& path);

// Text form used by save/load; exposed for in-memory round trips.
std::string format_radio_map(const RadioMap& db);
RadioMap parse_radio_map(const std::string& text);

inline constexpr std::string_view kRadioMapHeader = "xlayer-radiomap v1";

/// Outcome of matching one query: its distance and whether the majority zone
/// equals the zone the query claimed.
struct MatchSample {
    double k_dh = 0.0;
    bool zone_matches = false;
};

// Nearest-rank percentile, p in (0, 1].
double percentile(std::vector<double> values, double p);

inline constexpr double kDefaultEpsilonPercentile = 0.99;

struct SweepRow {
    double epsilon = 0.0;
    double false_reject_rate = 0.0;  // over legitimate samples
    double false_accept_rate = 0.0;  // over adversarial samples
};

std::vector<SweepRow> sweep_epsilon(const std::vector<MatchSample>& legitimate,
                                    const std::vector<MatchSample>& adversarial,
                                    const std::vector<double>& candidates);

} // namespace xlayer
