#include "xlayer/trusted_zone.hpp"

#include "xlayer/counters.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace xlayer {

void ZoneTable::assign(std::uint32_t cell_id, std::uint32_t zone_id)
{
    if (!cell_to_zone_.emplace(cell_id, zone_id).second) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument,
                               "cell " + std::to_string(cell_id) + " already assigned to a zone");
    }
}

std::uint32_t ZoneTable::zone_of(std::uint32_t cell_id) const
{
    auto it = cell_to_zone_.find(cell_id);
    if (it == cell_to_zone_.end()) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument,
                               "cell " + std::to_string(cell_id) + " belongs to no zone");
    }
    return it->second;
}

std::vector<std::uint32_t> ZoneTable::cells_in(std::uint32_t zone_id) const
{
    std::vector<std::uint32_t> out;
    for (const auto& [cell, zone] : cell_to_zone_) {
        if (zone == zone_id) {
            out.push_back(cell);
        }
    }
    return out;
}

std::vector<std::uint32_t> ZoneTable::zone_ids() const
{
    std::set<std::uint32_t> ids;
    for (const auto& entry : cell_to_zone_) {
        ids.insert(entry.second);
    }
    return {ids.begin(), ids.end()};
}

ZoneTable build_zone_table(std::vector<std::uint32_t> cells, std::size_t cells_per_zone)
{
    if (cells.empty()) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument, "cell list is empty");
    }
    if (cells_per_zone < 2) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument,
                               "a zone must hold at least two cells");
    }
    std::sort(cells.begin(), cells.end());
    ZoneTable table;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        table.assign(cells[i], static_cast<std::uint32_t>(i / cells_per_zone));
    }
    const std::size_t remainder = cells.size() % cells_per_zone;
    if (remainder != 0) {
        table.warnings.push_back("zone " + std::to_string(cells.size() / cells_per_zone) + " holds only "
                                 + std::to_string(remainder) + " cell(s)");
    }
    return table;
}

RadioMap label_survey(const std::vector<SurveySample>& survey, const std::vector<AccessPoint>& aps,
                      const ZoneTable& zones)
{
    RadioMap db;
    db.reserve(survey.size());
    for (const SurveySample& s : survey) {
        RadioMapRecord r;
        r.location = s.position;
        r.orientation = s.orientation;
        r.cell_id = serving_cell(s.position, aps);
        r.zone_id = zones.zone_of(r.cell_id);
        r.rss = s.rss;
        db.push_back(std::move(r));
    }
    return db;
}

void check_zone_consistency(const RadioMap& db, const ZoneTable& zones)
{
    for (std::size_t i = 0; i < db.size(); ++i) {
        if (!zones.contains(db[i].cell_id) || zones.zone_of(db[i].cell_id) != db[i].zone_id) {
            throw TrustedZoneError(TrustedZoneError::Kind::Inconsistent,
                                   "record " + std::to_string(i) + " has zone "
                                       + std::to_string(db[i].zone_id) + " inconsistent with cell "
                                       + std::to_string(db[i].cell_id));
        }
    }
}

std::int64_t squared_rss_distance(const RssVector& a, const RssVector& b, std::int32_t noise_floor_cdbm,
                                  std::size_t* shared)
{
    std::int64_t sum = 0;
    std::size_t common = 0;
    auto ia = a.readings.begin();
    auto ib = b.readings.begin();
    auto sq = [](std::int64_t d) { return d * d; };
    while (ia != a.readings.end() || ib != b.readings.end()) {
        if (ib == b.readings.end() || (ia != a.readings.end() && ia->ap_id < ib->ap_id)) {
            sum += sq(std::int64_t{ia->rss_cdbm} - noise_floor_cdbm);
            ++ia;
        } else if (ia == a.readings.end() || ib->ap_id < ia->ap_id) {
            sum += sq(std::int64_t{ib->rss_cdbm} - noise_floor_cdbm);
            ++ib;
        } else {
            sum += sq(std::int64_t{ia->rss_cdbm} - ib->rss_cdbm);
            ++common;
            ++ia;
            ++ib;
        }
    }
    if (shared != nullptr) {
        *shared = common;
    }
    return sum;
}

MatchResult knn_match(const RssVector& query, const RadioMap& db, std::size_t k,
                      std::int32_t noise_floor_cdbm)
{
    if (db.empty()) {
        throw TrustedZoneError(TrustedZoneError::Kind::EmptyDatabase, "radio map is empty");
    }
    if (k == 0) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument, "K must be at least 1");
    }
    const std::size_t keep = std::min(k, db.size());

    // (squared distance, record index), kept sorted; lexicographic order is the tie-break.
    std::vector<std::pair<std::int64_t, std::size_t>> best;
    best.reserve(keep + 1);
    bool any_shared = false;
    for (std::size_t i = 0; i < db.size(); ++i) {
        std::size_t shared = 0;
        const std::int64_t d2 = squared_rss_distance(query, db[i].rss, noise_floor_cdbm, &shared);
        any_shared = any_shared || shared > 0;
        if (best.size() == keep && d2 >= best.back().first) {
            continue;
        }
        const std::pair<std::int64_t, std::size_t> entry{d2, i};
        best.insert(std::upper_bound(best.begin(), best.end(), entry), entry);
        if (best.size() > keep) {
            best.pop_back();
        }
    }
    count::knn_evals(db.size());
    if (!any_shared) {
        throw TrustedZoneError(TrustedZoneError::Kind::AllImputed,
                               "query shares no access point with any radio-map record");
    }

    MatchResult out;
    out.neighbors.reserve(best.size());
    for (const auto& [d2, idx] : best) {
        out.neighbors.push_back(Neighbor{idx, std::sqrt(static_cast<double>(d2)), db[idx].zone_id});
    }
    out.k_dh = out.neighbors.front().distance;
    out.matched_location = db[out.neighbors.front().record_index].location;

    // Majority vote; among tied zones the one holding the nearer neighbor wins.
    std::map<std::uint32_t, std::size_t> votes;
    for (const Neighbor& n : out.neighbors) {
        ++votes[n.zone_id];
    }
    std::size_t top = 0;
    for (const auto& entry : votes) {
        top = std::max(top, entry.second);
    }
    for (const Neighbor& n : out.neighbors) {
        if (votes[n.zone_id] == top) {
            out.matched_zone = n.zone_id;
            break;
        }
    }
    return out;
}

bool zone_legitimacy(const MatchResult& m, std::uint32_t claimed_zone, double epsilon)
{
    if (!(epsilon > 0.0)) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument, "epsilon must be positive");
    }
    return m.k_dh <= epsilon && m.matched_zone == claimed_zone;
}

namespace {

void append_double(std::string& out, double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        throw TrustedZoneError(TrustedZoneError::Kind::Io, "cannot format coordinate");
    }
    out.append(buf, ptr);
}

template <typename T>
T parse_field(std::string_view text, std::size_t line, const char* name)
{
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        throw TrustedZoneError(TrustedZoneError::Kind::ParseError,
                               "line " + std::to_string(line) + ": bad " + name + " '" + std::string(text)
                                   + "'",
                               line);
    }
    return value;
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

RadioMapRecord parse_record(std::string_view line_text, std::size_t line)
{
    const auto fields = split(line_text, ',');
    if (fields.size() != 6) {
        throw TrustedZoneError(TrustedZoneError::Kind::ParseError,
                               "line " + std::to_string(line) + ": expected 6 fields, found "
                                   + std::to_string(fields.size()),
                               line);
    }
    RadioMapRecord r;
    r.zone_id = parse_field<std::uint32_t>(fields[0], line, "zone_id");
    r.cell_id = parse_field<std::uint32_t>(fields[1], line, "cell_id");
    r.location.x = parse_field<double>(fields[2], line, "loc_x");
    r.location.y = parse_field<double>(fields[3], line, "loc_y");
    r.orientation = parse_field<std::uint32_t>(fields[4], line, "orientation");
    for (std::string_view entry : split(fields[5], ';')) {
        const auto parts = split(entry, ':');
        if (parts.size() != 3) {
            throw TrustedZoneError(TrustedZoneError::Kind::ParseError,
                                   "line " + std::to_string(line) + ": reading must be ap:rss:toa",
                                   line);
        }
        RssReading reading;
        reading.ap_id = parse_field<std::uint32_t>(parts[0], line, "ap");
        reading.rss_cdbm = parse_field<std::int32_t>(parts[1], line, "rss");
        reading.toa_ns = parse_field<std::uint64_t>(parts[2], line, "toa");
        r.rss.readings.push_back(reading);
    }
    try {
        validate_rss_vector(r.rss);
    } catch (const CodecError& e) {
        throw TrustedZoneError(TrustedZoneError::Kind::ParseError,
                               "line " + std::to_string(line) + ": " + e.what(), line);
    }
    return r;
}

} // namespace

std::string format_radio_map(const RadioMap& db)
{
    std::string out;
    out.reserve(64 + db.size() * 400);
    out.append(kRadioMapHeader);
    out.push_back('\n');
    for (const RadioMapRecord& r : db) {
        validate_rss_vector(r.rss);
        out += std::to_string(r.zone_id);
        out.push_back(',');
        out += std::to_string(r.cell_id);
        out.push_back(',');
        append_double(out, r.location.x);
        out.push_back(',');
        append_double(out, r.location.y);
        out.push_back(',');
        out += std::to_string(r.orientation);
        out.push_back(',');
        for (std::size_t i = 0; i < r.rss.readings.size(); ++i) {
            const RssReading& reading = r.rss.readings[i];
            if (i > 0) {
                out.push_back(';');
            }
            out += std::to_string(reading.ap_id);
            out.push_back(':');
            out += std::to_string(reading.rss_cdbm);
            out.push_back(':');
            out += std::to_string(reading.toa_ns);
        }
        out.push_back('\n');
    }
    return out;
}

RadioMap parse_radio_map(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) {
        throw TrustedZoneError(TrustedZoneError::Kind::ParseError, "line 1: missing header", 1);
    }
    if (line != kRadioMapHeader) {
        if (line.rfind("xlayer-radiomap ", 0) == 0) {
            throw TrustedZoneError(TrustedZoneError::Kind::VersionMismatch,
                                   "unsupported radio map version '" + line.substr(16) + "'", 1);
        }
        throw TrustedZoneError(TrustedZoneError::Kind::ParseError, "line 1: not a radio map header", 1);
    }
    RadioMap db;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        db.push_back(parse_record(line, line_no));
    }
    return db;
}

void save_radio_map(const RadioMap& db, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw TrustedZoneError(TrustedZoneError::Kind::Io, "cannot open " + path.string() + " for writing");
    }
    const std::string text = format_radio_map(db);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw TrustedZoneError(TrustedZoneError::Kind::Io, "write to " + path.string() + " failed");
    }
}

RadioMap load_radio_map(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw TrustedZoneError(TrustedZoneError::Kind::Io, "cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_radio_map(buf.str());
}

double percentile(std::vector<double> values, double p)
{
    if (values.empty()) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument, "percentile of no samples");
    }
    if (!(p > 0.0 && p <= 1.0)) {
        throw TrustedZoneError(TrustedZoneError::Kind::InvalidArgument, "percentile must be in (0, 1]");
    }
    std::sort(values.begin(), values.end());
    const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(values.size())));
    return values[std::max<std::size_t>(rank, 1) - 1];
}

std::vector<SweepRow> sweep_epsilon(const std::vector<MatchSample>& legitimate,
                                    const std::vector<MatchSample>& adversarial,
                                    const std::vector<double>& candidates)
{
    std::vector<SweepRow> rows;
    rows.reserve(candidates.size());
    for (double eps : candidates) {
        SweepRow row;
        row.epsilon = eps;
        std::size_t rejected = 0;
        for (const MatchSample& s : legitimate) {
            if (!(s.k_dh <= eps && s.zone_matches)) {
                ++rejected;
            }
        }
        std::size_t accepted = 0;
        for (const MatchSample& s : adversarial) {
            if (s.k_dh <= eps && s.zone_matches) {
                ++accepted;
            }
        }
        row.false_reject_rate =
            legitimate.empty() ? 0.0 : static_cast<double>(rejected) / static_cast<double>(legitimate.size());
        row.false_accept_rate =
            adversarial.empty() ? 0.0 : static_cast<double>(accepted) / static_cast<double>(adversarial.size());
        rows.push_back(row);
    }
    return rows;
}

} // namespace xlayer
