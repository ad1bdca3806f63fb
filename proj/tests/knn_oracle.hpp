#pragma once

// Exhaustive k-NN scan written straight from the matching rule, sharing no
// code with the library matcher: full sort of every record, then the vote.

#include "xlayer/trusted_zone.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace xlayer::testoracle {

inline double rss_distance(const RssVector& a, const RssVector& b, std::int32_t floor)
{
    std::map<std::uint32_t, std::pair<std::int64_t, std::int64_t>> aligned;
    for (const auto& r : a.readings) {
        aligned[r.ap_id] = {r.rss_cdbm, floor};
    }
    for (const auto& r : b.readings) {
        auto it = aligned.find(r.ap_id);
        if (it == aligned.end()) {
            aligned[r.ap_id] = {floor, r.rss_cdbm};
        } else {
            it->second.second = r.rss_cdbm;
        }
    }
    std::int64_t sum = 0;
    for (const auto& [ap, v] : aligned) {
        sum += (v.first - v.second) * (v.first - v.second);
    }
    return std::sqrt(static_cast<double>(sum));
}

struct BruteResult {
    std::vector<std::size_t> indices;
    std::vector<double> distances;
    std::uint32_t zone = 0;
};

inline BruteResult brute_knn(const RssVector& q, const RadioMap& db, std::size_t k, std::int32_t floor)
{
    std::vector<std::pair<double, std::size_t>> all;
    all.reserve(db.size());
    for (std::size_t i = 0; i < db.size(); ++i) {
        all.push_back({rss_distance(q, db[i].rss, floor), i});
    }
    std::sort(all.begin(), all.end());
    BruteResult out;
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
        out.indices.push_back(all[i].second);
        out.distances.push_back(all[i].first);
    }
    std::map<std::uint32_t, std::size_t> votes;
    std::size_t best = 0;
    for (std::size_t idx : out.indices) {
        best = std::max(best, ++votes[db[idx].zone_id]);
    }
    // tied zones: the one whose member comes first in distance order
    for (std::size_t idx : out.indices) {
        if (votes[db[idx].zone_id] == best) {
            out.zone = db[idx].zone_id;
            break;
        }
    }
    return out;
}

} // namespace xlayer::testoracle
