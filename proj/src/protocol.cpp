#include "xlayer/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <deque>
#include <stdexcept>

namespace xlayer {

const char* to_string(Reason r)
{
    switch (r) {
    case Reason::None:
        return "None";
    case Reason::DecryptFailed:
        return "DecryptFailed";
    case Reason::UnknownIdentity:
        return "UnknownIdentity";
    case Reason::StaleRss:
        return "StaleRss";
    case Reason::ZoneRejected:
        return "ZoneRejected";
    case Reason::MacMismatch:
        return "MacMismatch";
    case Reason::SqnOutOfRange:
        return "SqnOutOfRange";
    case Reason::UnsolicitedChallenge:
        return "UnsolicitedChallenge";
    case Reason::ResMismatch:
        return "ResMismatch";
    case Reason::NoPendingEntry:
        return "NoPendingEntry";
    case Reason::Expired:
        return "Expired";
    case Reason::HalfOpenCapacityExceeded:
        return "HalfOpenCapacityExceeded";
    case Reason::DuplicatePending:
        return "DuplicatePending";
    case Reason::Malformed:
        return "Malformed";
    case Reason::TimedOut:
        return "TimedOut";
    case Reason::NoApInRange:
        return "NoApInRange";
    case Reason::CacheValid:
        return "CacheValid";
    case Reason::UnknownSession:
        return "UnknownSession";
    }
    return "Unknown";
}

const char* to_string(Outcome o)
{
    switch (o) {
    case Outcome::MutualAuthSuccess:
        return "MutualAuthSuccess";
    case Outcome::FastPathSuccess:
        return "FastPathSuccess";
    case Outcome::RejectedByAs:
        return "RejectedByAs";
    case Outcome::RejectedByMt:
        return "RejectedByMt";
    case Outcome::RejectedByNs:
        return "RejectedByNs";
    case Outcome::TimedOut:
        return "TimedOut";
    }
    return "Unknown";
}

const char* to_string(SlaMode m)
{
    return m == SlaMode::Centralized ? "centralized" : "decentralized";
}

const char* to_string(AuthScheme s)
{
    switch (s) {
    case AuthScheme::CrossLayer:
        return "cross-layer";
    case AuthScheme::LegacyBaseline:
        return "legacy";
    case AuthScheme::CryptoOnly:
        return "crypto-only";
    case AuthScheme::NonCrypto:
        return "non-crypto";
    }
    return "unknown";
}

const char* to_string(Party p)
{
    switch (p) {
    case Party::Mt:
        return "MT";
    case Party::Ns:
        return "NS";
    case Party::As:
        return "AS";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// HalfOpenTable

HalfOpenTable::HalfOpenTable(std::size_t capacity, std::uint64_t timeout_ns)
    : capacity_(capacity)
    , timeout_ns_(timeout_ns)
{
    if (capacity == 0 || timeout_ns == 0) {
        throw std::invalid_argument("half-open table needs positive capacity and timeout");
    }
}

Reason HalfOpenTable::open(std::uint32_t session_id, const Res64& xres, std::uint64_t now_ns)
{
    if (has(session_id)) {
        return Reason::DuplicatePending;
    }
    if (entries_.size() >= capacity_) {
        return Reason::HalfOpenCapacityExceeded;
    }
    entries_.emplace(session_id, PendingEntry{session_id, xres, now_ns, now_ns + timeout_ns_});
    high_water_ = std::max(high_water_, entries_.size());
    return Reason::None;
}

Reason HalfOpenTable::verify(std::uint32_t session_id, const Res64& res, std::uint64_t now_ns)
{
    auto it = entries_.find(session_id);
    if (it == entries_.end()) {
        return Reason::NoPendingEntry;
    }
    const PendingEntry entry = it->second;
    entries_.erase(it);
    if (now_ns >= entry.deadline_ns) {
        return Reason::Expired;
    }
    return verify_res(res, entry.xres) ? Reason::None : Reason::ResMismatch;
}

bool HalfOpenTable::remove(std::uint32_t session_id)
{
    return entries_.erase(session_id) != 0;
}

std::size_t HalfOpenTable::purge(std::uint64_t now_ns)
{
    std::size_t removed = 0;
    for (auto it = entries_.begin(); it != entries_.end();) {
        if (it->second.deadline_ns <= now_ns) {
            purges_.push_back(PurgeRecord{it->first, it->second.deadline_ns, now_ns});
            it = entries_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

std::optional<std::uint64_t> HalfOpenTable::next_deadline() const
{
    std::optional<std::uint64_t> best;
    for (const auto& entry : entries_) {
        if (!best || entry.second.deadline_ns < *best) {
            best = entry.second.deadline_ns;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// MobileTerminal

MobileTerminal::MobileTerminal(std::uint32_t id, const Identity128& im, const Key128& long_term_key, Rng rng)
    : id_(id)
    , im_(im)
    , long_term_key_(long_term_key)
    , rng_(std::move(rng))
{
}

void MobileTerminal::place(Position pos, std::uint32_t cell_id, std::uint32_t zone_id)
{
    position_ = pos;
    cell_id_ = cell_id;
    zone_id_ = zone_id;
}

Nonce96 MobileTerminal::next_nonce()
{
    // terminal id || 64-bit counter: unique per terminal for its lifetime.
    Nonce96 nonce{};
    for (int i = 0; i < 4; ++i) {
        nonce[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(id_ >> (24 - 8 * i));
    }
    const std::uint64_t counter = ++nonce_counter_;
    for (int i = 0; i < 8; ++i) {
        nonce[static_cast<std::size_t>(4 + i)] = static_cast<std::uint8_t>(counter >> (56 - 8 * i));
    }
    return nonce;
}

std::variant<AuthRequest, Reason> MobileTerminal::initiate(std::uint32_t session_id, SlaMode sla,
                                                           const RadioContext& radio,
                                                           const ProtocolParams& params, std::uint64_t now_ns)
{
    if (params.zone_cache && fast_path(zone_id_, now_ns)) {
        return Reason::CacheValid;
    }
    SampleOptions opts;
    opts.emit_ns = now_ns;
    opts.orientation = static_cast<std::uint32_t>(rng_.below(kDefaultOrientations));
    RssVector rss;
    try {
        rss = sample_rss_vector(position_, *radio.aps, *radio.cfg, rng_, opts);
    } catch (const RadioError& e) {
        if (e.kind() == RadioError::Kind::NoApInRange) {
            return Reason::NoApInRange;
        }
        throw;
    }

    AuthRequest req;
    PendingInitiation pending;
    pending.session_id = session_id;
    pending.zone_id = zone_id_;
    pending.sla = sla;
    switch (params.scheme) {
    case AuthScheme::CrossLayer: {
        const FingerprintKey fp = fingerprint(rss);
        req.nonce = next_nonce();
        req.tim_ciphertext = encrypt_tim(mask_im(im_, fp.key), fp.key, req.nonce);
        req.rss = std::move(rss);
        pending.key = fp.key;
        break;
    }
    case AuthScheme::LegacyBaseline:
        req.tim_ciphertext.assign(im_.begin(), im_.end());
        req.tim_ciphertext.insert(req.tim_ciphertext.end(), long_term_key_.begin(), long_term_key_.end());
        req.nonce = next_nonce();
        req.rss = std::move(rss);
        pending.key = long_term_key_;
        break;
    case AuthScheme::CryptoOnly: {
        // Identity plus a serving-cell measurement report (strongest reading only).
        req.tim_ciphertext.assign(im_.begin(), im_.end());
        req.nonce = next_nonce();
        auto strongest = std::max_element(
            rss.readings.begin(), rss.readings.end(),
            [](const RssReading& a, const RssReading& b) { return a.rss_cdbm < b.rss_cdbm; });
        req.rss.readings = {*strongest};
        pending.key = long_term_key_;
        break;
    }
    case AuthScheme::NonCrypto:
        req.rss = std::move(rss);
        break;
    }
    pending_ = pending;
    return req;
}

std::variant<ResResponse, Reason> MobileTerminal::handle_challenge(std::uint32_t session_id, const Challenge& ch,
                                                                   const ProtocolParams& params,
                                                                   std::uint64_t now_ns)
{
    if (!pending_ || pending_->session_id != session_id || params.scheme == AuthScheme::NonCrypto) {
        return Reason::UnsolicitedChallenge;
    }
    auto result = mt_process_challenge(pending_->key, ch.rand, ch.autn, sqn_);
    if (const AkaError* err = std::get_if<AkaError>(&result)) {
        // Rejecting the first challenge ends the initiation; a duplicate after
        // answering leaves it open for the verdict.
        if (!pending_->answered) {
            pending_.reset();
        }
        return *err == AkaError::MacMismatch ? Reason::MacMismatch : Reason::SqnOutOfRange;
    }
    const ChallengeAccepted& acc = std::get<ChallengeAccepted>(result);
    sqn_ = acc.new_state;
    pending_->answered = true;
    if (params.zone_cache) {
        cache_[pending_->zone_id] = CacheEntry{acc.ck, acc.ik, now_ns + params.cache_ttl_ns};
    }
    return ResResponse{acc.res};
}

void MobileTerminal::handle_verdict(std::uint32_t session_id, const Verdict& v)
{
    if (!pending_ || pending_->session_id != session_id) {
        return;
    }
    if (!v.accept && pending_->answered) {
        cache_.erase(pending_->zone_id);
    }
    pending_.reset();
}

void MobileTerminal::abandon(std::uint32_t session_id)
{
    if (!pending_ || pending_->session_id != session_id) {
        return;
    }
    if (pending_->answered) {
        cache_.erase(pending_->zone_id);
    }
    pending_.reset();
}

bool MobileTerminal::fast_path(std::uint32_t zone_id, std::uint64_t now_ns) const
{
    auto it = cache_.find(zone_id);
    return it != cache_.end() && now_ns < it->second.expiry_ns;
}

// ---------------------------------------------------------------------------
// AuthSlice

AuthSlice::AuthSlice(std::shared_ptr<const RadioMap> db, ZoneTable zones, std::int32_t noise_floor_cdbm,
                     ProtocolParams params, Rng rng)
    : db_(std::move(db))
    , zones_(std::move(zones))
    , noise_floor_cdbm_(noise_floor_cdbm)
    , params_(params)
    , rng_(std::move(rng))
    , table_(params.half_open_capacity, params.response_timeout_ns)
{
}

void AuthSlice::enroll(const Identity128& im, const Key128& long_term_key)
{
    registry_[im] = long_term_key;
}

namespace {

bool fresh(const RssVector& rss, std::uint64_t now_ns, std::uint64_t window_ns)
{
    std::uint64_t newest = 0;
    for (const RssReading& r : rss.readings) {
        newest = std::max(newest, r.toa_ns);
    }
    return newest <= now_ns && now_ns - newest <= window_ns;
}

} // namespace

AsDecision AuthSlice::issue(const Identity128& im, const Key128& k)
{
    SqnIssuer& issuer = issued_[im];
    Rand128 rand{};
    rng_.fill(rand);
    IssuedAv out;
    out.sqn = issuer.next();
    out.av = build_av(k, out.sqn, params_.amf, rand, issuer);
    AsDecision d;
    d.issued = out;
    return d;
}

AsDecision AuthSlice::handle_request(const AuthRequest& req, std::uint32_t cell_id, std::uint64_t now_ns)
{
    last_match_.reset();
    auto reject = [](Reason r) {
        AsDecision d;
        d.reason = r;
        return d;
    };
    auto zone_check = [&](const RssVector& rss) {
        if (!zones_.contains(cell_id)) {
            return false;
        }
        try {
            last_match_ = knn_match(rss, *db_, params_.k, noise_floor_cdbm_);
        } catch (const TrustedZoneError& e) {
            if (e.kind() == TrustedZoneError::Kind::AllImputed) {
                return false;
            }
            throw;
        }
        return zone_legitimacy(*last_match_, zones_.zone_of(cell_id), params_.epsilon);
    };

    switch (params_.scheme) {
    case AuthScheme::CrossLayer: {
        const FingerprintKey fp = fingerprint_from_wire(encode_rss_vector(req.rss));
        auto opened = decrypt_tim(req.tim_ciphertext, fp.key, req.nonce);
        if (std::holds_alternative<AkaError>(opened)) {
            return reject(Reason::DecryptFailed);
        }
        const Identity128 im = unmask_tim(std::get<Identity128>(opened), fp.key);
        if (!enrolled(im)) {
            return reject(Reason::UnknownIdentity);
        }
        if (!fresh(req.rss, now_ns, params_.freshness_ns)) {
            return reject(Reason::StaleRss);
        }
        if (!zone_check(req.rss)) {
            return reject(Reason::ZoneRejected);
        }
        return issue(im, fp.key);
    }
    case AuthScheme::LegacyBaseline: {
        if (req.tim_ciphertext.size() != 32) {
            return reject(Reason::Malformed);
        }
        Identity128 im{};
        Key128 k{};
        std::copy_n(req.tim_ciphertext.begin(), 16, im.begin());
        std::copy_n(req.tim_ciphertext.begin() + 16, 16, k.begin());
        auto it = registry_.find(im);
        if (it == registry_.end() || !equal_ct(it->second, k)) {
            return reject(Reason::UnknownIdentity);
        }
        return issue(im, k);
    }
    case AuthScheme::CryptoOnly: {
        if (req.tim_ciphertext.size() != 16) {
            return reject(Reason::Malformed);
        }
        Identity128 im{};
        std::copy_n(req.tim_ciphertext.begin(), 16, im.begin());
        auto it = registry_.find(im);
        if (it == registry_.end()) {
            return reject(Reason::UnknownIdentity);
        }
        if (!fresh(req.rss, now_ns, params_.freshness_ns)) {
            return reject(Reason::StaleRss);
        }
        return issue(im, it->second);
    }
    case AuthScheme::NonCrypto: {
        fingerprint_from_wire(encode_rss_vector(req.rss));
        if (!fresh(req.rss, now_ns, params_.freshness_ns)) {
            return reject(Reason::StaleRss);
        }
        if (!zone_check(req.rss)) {
            return reject(Reason::ZoneRejected);
        }
        AsDecision d;
        d.accepted_without_av = true;
        return d;
    }
    }
    return reject(Reason::Malformed);
}

// ---------------------------------------------------------------------------
// NetworkSlice

NetworkSlice::NetworkSlice(std::size_t capacity, std::uint64_t timeout_ns)
    : table_(capacity, timeout_ns)
{
}

std::variant<Challenge, Reason> NetworkSlice::forward_challenge(std::uint32_t session_id, const AvToNs& av,
                                                                std::uint64_t now_ns)
{
    const Reason r = table_.open(session_id, av.xres, now_ns);
    if (r != Reason::None) {
        return r;
    }
    return Challenge{av.rand, av.autn};
}

Reason NetworkSlice::verify(std::uint32_t session_id, const ResResponse& rsp, std::uint64_t now_ns)
{
    return table_.verify(session_id, rsp.res, now_ns);
}

// ---------------------------------------------------------------------------
// SimTransport

SimTransport::SimTransport(double uplink_drop, double downlink_drop, std::uint64_t hop_delay_ns, Rng rng)
    : uplink_drop_(uplink_drop)
    , downlink_drop_(downlink_drop)
    , hop_delay_ns_(hop_delay_ns)
    , rng_(std::move(rng))
{
}

void SimTransport::set_drop(double uplink, double downlink)
{
    uplink_drop_ = uplink;
    downlink_drop_ = downlink;
}

bool SimTransport::send(const Envelope& env)
{
    count::message(env.payload.size());
    double p = 0.0;
    if (env.from == Party::Mt) {
        p = uplink_drop_;
    } else if (env.to == Party::Mt) {
        p = downlink_drop_;
    }
    const bool dropped = p > 0.0 && rng_.uniform01() < p;
    transcript_.push_back(TranscriptEntry{env, dropped});
    return !dropped;
}

// ---------------------------------------------------------------------------
// Calibration

namespace {

std::vector<Position> unique_locations(const RadioMap& db)
{
    std::vector<Position> out;
    for (const RadioMapRecord& r : db) {
        if (std::find(out.begin(), out.end(), r.location) == out.end()) {
            out.push_back(r.location);
        }
    }
    return out;
}

} // namespace

std::vector<MatchSample> legitimate_match_samples(const RadioMap& db, const std::vector<AccessPoint>& aps,
                                                  const ZoneTable& zones, const EnvironmentConfig& cfg,
                                                  std::size_t k, std::size_t n, Rng& rng)
{
    const std::vector<Position> points = unique_locations(db);
    std::vector<MatchSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Position p = points[rng.below(points.size())];
        SampleOptions opts;
        opts.emit_ns = kWorldEpochNs;
        opts.orientation = static_cast<std::uint32_t>(rng.below(kDefaultOrientations));
        const RssVector q = sample_rss_vector(p, aps, cfg, rng, opts);
        const MatchResult m = knn_match(q, db, k, cfg.noise_floor_cdbm);
        out.push_back(MatchSample{m.k_dh, m.matched_zone == zones.zone_of(serving_cell(p, aps))});
    }
    return out;
}

EpsilonCalibration calibrate_epsilon(const RadioMap& db, const std::vector<AccessPoint>& aps,
                                     const ZoneTable& zones, const EnvironmentConfig& cfg, std::size_t k,
                                     std::size_t n, double headroom, Rng& rng)
{
    EpsilonCalibration cal;
    cal.legitimate = legitimate_match_samples(db, aps, zones, cfg, k, n, rng);
    std::vector<double> distances;
    distances.reserve(cal.legitimate.size());
    for (const MatchSample& s : cal.legitimate) {
        distances.push_back(s.k_dh);
    }
    cal.p99 = percentile(distances, kDefaultEpsilonPercentile);
    cal.epsilon = cal.p99 * headroom;
    if (!(cal.epsilon > 0.0)) {
        // Noise-free environments calibrate to zero; any positive threshold admits exact matches.
        cal.epsilon = 1.0;
    }
    return cal;
}

// ---------------------------------------------------------------------------
// World

namespace {

ZoneTable zones_for(const std::vector<AccessPoint>& aps, std::size_t cells_per_zone)
{
    std::vector<std::uint32_t> cells;
    for (const AccessPoint& ap : aps) {
        if (std::find(cells.begin(), cells.end(), ap.cell_id) == cells.end()) {
            cells.push_back(ap.cell_id);
        }
    }
    return build_zone_table(cells, cells_per_zone);
}

RadioMap synthesize_map(const WorldConfig& config, const std::vector<AccessPoint>& aps, const ZoneTable& zones)
{
    Rng survey_rng = Rng(config.env.seed).fork("survey");
    const auto survey = synthesize_radio_map(default_survey_grid(), config.orientations,
                                             config.samples_per_combo, aps, config.env, survey_rng);
    return label_survey(survey, aps, zones);
}

std::shared_ptr<const RadioMap> map_for(const WorldConfig& config, const std::vector<AccessPoint>& aps,
                                        const ZoneTable& zones)
{
    if (config.radio_map) {
        check_zone_consistency(*config.radio_map, zones);
        return config.radio_map;
    }
    return std::make_shared<const RadioMap>(synthesize_map(config, aps, zones));
}

} // namespace

World::World(WorldConfig config, Rng rng)
    : config_(std::move(config))
    , rng_(std::move(rng))
    , aps_(default_access_points())
    , zones_(zones_for(aps_, config_.cells_per_zone))
    , db_(map_for(config_, aps_, zones_))
    , as_(db_, zones_, config_.env.noise_floor_cdbm, config_.protocol, rng_.fork("as"))
    , ns_(config_.protocol.half_open_capacity, config_.protocol.response_timeout_ns)
    , transport_(config_.uplink_drop, config_.downlink_drop, config_.hop_delay_ns, rng_.fork("transport"))
{
    config_.env.validate();
    validate_access_points(aps_);
    survey_points_ = unique_locations(*db_);
    for (const auto& [cell, zone] : zones_.cells()) {
        CellSite site;
        site.cell_id = cell;
        site.zone_id = zone;
        for (const Position& p : survey_points_) {
            if (serving_cell(p, aps_) == cell) {
                site.anchors.push_back(p);
            }
        }
        sites_.push_back(std::move(site));
    }

    if (config_.protocol.epsilon > 0.0) {
        calibration_.epsilon = config_.protocol.epsilon;
    } else {
        Rng cal_rng = rng_.fork("calibration");
        calibration_ = calibrate_epsilon(*db_, aps_, zones_, config_.env, config_.protocol.k,
                                         config_.calibration_queries, config_.protocol.epsilon_headroom,
                                         cal_rng);
        as_.set_epsilon(calibration_.epsilon);
    }

    for (std::size_t i = 0; i < config_.subscribers; ++i) {
        add_mt();
    }
}

ZoneTable default_zone_table(std::size_t cells_per_zone)
{
    return zones_for(default_access_points(), cells_per_zone);
}

RadioMap synthesize_world_map(const WorldConfig& config)
{
    config.env.validate();
    const auto aps = default_access_points();
    return synthesize_map(config, aps, zones_for(aps, config.cells_per_zone));
}

World World::build(const WorldConfig& config)
{
    return World(config, Rng(config.env.seed));
}

MobileTerminal& World::mt(std::uint32_t id)
{
    for (MobileTerminal& m : mts_) {
        if (m.id() == id) {
            return m;
        }
    }
    throw std::out_of_range("no mobile terminal with id " + std::to_string(id));
}

bool World::has_mt(std::uint32_t id) const
{
    return std::any_of(mts_.begin(), mts_.end(), [id](const MobileTerminal& m) { return m.id() == id; });
}

MobileTerminal& World::add_mt()
{
    const auto id = static_cast<std::uint32_t>(mts_.size() + 1);
    Rng id_rng = rng_.fork("subscriber-" + std::to_string(id));
    Identity128 im{};
    Key128 key{};
    id_rng.fill(im);
    id_rng.fill(key);
    as_.enroll(im, key);
    mts_.emplace_back(id, im, key, id_rng.fork("mt"));
    mts_.back().set_sqn_window(config_.protocol.sqn_window);
    const Position start = survey_points_[id_rng.below(survey_points_.size())];
    place_mt(id, start);
    return mt(id);
}

void World::place_mt(std::uint32_t id, Position pos)
{
    const std::uint32_t cell = serving_cell(pos, aps_);
    mt(id).place(pos, cell, zones_.contains(cell) ? zones_.zone_of(cell) : 0);
}

void World::advance(std::uint64_t ns)
{
    const std::uint64_t target = now_ns_ + ns;
    // Step through deadlines so each entry is purged exactly when it expires.
    while (true) {
        std::optional<std::uint64_t> next;
        for (const HalfOpenTable* t : {&ns_.table(), &as_.table()}) {
            if (auto d = t->next_deadline(); d && (!next || *d < *next)) {
                next = d;
            }
        }
        if (!next || *next > target) {
            break;
        }
        now_ns_ = std::max(now_ns_, *next);
        ns_.table().purge(now_ns_);
        as_.table().purge(now_ns_);
    }
    now_ns_ = target;
}

std::uint32_t World::open_session(std::uint32_t mt_endpoint, SlaMode sla)
{
    const std::uint32_t id = next_session_++;
    sessions_[id] = SessionInfo{mt_endpoint, sla, std::nullopt, Reason::None};
    return id;
}

const SessionInfo* World::session(std::uint32_t session_id) const
{
    auto it = sessions_.find(session_id);
    return it == sessions_.end() ? nullptr : &it->second;
}

void World::conclude(std::uint32_t session_id, Outcome outcome, Reason reason)
{
    // First outcome wins: later messages for a closed session do not rewrite it.
    auto it = sessions_.find(session_id);
    if (it != sessions_.end() && !it->second.outcome) {
        it->second.outcome = outcome;
        it->second.reason = reason;
    }
}

Envelope World::reply(const Envelope& to_answer, Party from, Party to, const ProtocolMessage& msg) const
{
    Envelope out;
    out.from = from;
    out.to = to;
    out.session_id = to_answer.session_id;
    out.mt_endpoint = to_answer.mt_endpoint;
    out.cell_id = to_answer.cell_id;
    out.sent_ns = now_ns_;
    out.payload = encode_message(msg);
    return out;
}

std::vector<Envelope> World::deliver(const Envelope& env)
{
    ProtocolMessage msg;
    try {
        msg = decode_message(env.payload);
    } catch (const CodecError&) {
        return {};
    }
    switch (env.to) {
    case Party::As:
        return deliver_to_as(env, msg);
    case Party::Ns:
        return deliver_to_ns(env, msg);
    case Party::Mt:
        return deliver_to_mt(env, msg);
    }
    return {};
}

std::vector<Envelope> World::deliver_to_as(const Envelope& env, const ProtocolMessage& msg)
{
    const SessionInfo* info = session(env.session_id);
    if (info == nullptr) {
        return {};
    }
    const SlaMode sla = info->sla;
    std::vector<Envelope> out;

    if (const auto* req = std::get_if<AuthRequest>(&msg)) {
        if (sla == SlaMode::Decentralized && as_.table().has(env.session_id)) {
            conclude(env.session_id, Outcome::RejectedByAs, Reason::DuplicatePending);
            out.push_back(reply(env, Party::As, Party::Mt, Verdict{false, static_cast<std::uint8_t>(Reason::DuplicatePending)}));
            return out;
        }
        const AsDecision d = as_.handle_request(*req, env.cell_id, now_ns_);
        if (d.reason != Reason::None) {
            conclude(env.session_id, Outcome::RejectedByAs, d.reason);
            out.push_back(reply(env, Party::As, Party::Mt, Verdict{false, static_cast<std::uint8_t>(d.reason)}));
        } else if (d.accepted_without_av) {
            conclude(env.session_id, Outcome::MutualAuthSuccess, Reason::None);
            out.push_back(reply(env, Party::As, Party::Mt, Verdict{true, 0}));
        } else if (sla == SlaMode::Centralized) {
            const AuthVector& av = d.issued->av;
            out.push_back(reply(env, Party::As, Party::Ns, AvToNs{av.rand, av.autn, av.xres}));
        } else {
            const AuthVector& av = d.issued->av;
            const Reason r = as_.table().open(env.session_id, av.xres, now_ns_);
            if (r != Reason::None) {
                conclude(env.session_id, Outcome::RejectedByAs, r);
                out.push_back(reply(env, Party::As, Party::Mt, Verdict{false, static_cast<std::uint8_t>(r)}));
            } else {
                out.push_back(reply(env, Party::As, Party::Mt, Challenge{av.rand, av.autn}));
            }
        }
    } else if (const auto* rsp = std::get_if<ResResponse>(&msg)) {
        const Reason r = as_.table().verify(env.session_id, rsp->res, now_ns_);
        conclude(env.session_id, r == Reason::None ? Outcome::MutualAuthSuccess : Outcome::RejectedByAs, r);
        out.push_back(reply(env, Party::As, Party::Mt, Verdict{r == Reason::None, static_cast<std::uint8_t>(r)}));
    } else if (std::holds_alternative<Verdict>(msg)) {
        as_.table().remove(env.session_id);
    }
    return out;
}

std::vector<Envelope> World::deliver_to_ns(const Envelope& env, const ProtocolMessage& msg)
{
    std::vector<Envelope> out;
    if (const auto* av = std::get_if<AvToNs>(&msg)) {
        if (env.from != Party::As) {
            return out;
        }
        auto fwd = ns_.forward_challenge(env.session_id, *av, now_ns_);
        if (const Reason* r = std::get_if<Reason>(&fwd)) {
            conclude(env.session_id, Outcome::RejectedByNs, *r);
            out.push_back(reply(env, Party::Ns, Party::Mt, Verdict{false, static_cast<std::uint8_t>(*r)}));
        } else {
            out.push_back(reply(env, Party::Ns, Party::Mt, std::get<Challenge>(fwd)));
        }
    } else if (const auto* rsp = std::get_if<ResResponse>(&msg)) {
        const Reason r = ns_.verify(env.session_id, *rsp, now_ns_);
        conclude(env.session_id, r == Reason::None ? Outcome::MutualAuthSuccess : Outcome::RejectedByNs, r);
        out.push_back(reply(env, Party::Ns, Party::Mt, Verdict{r == Reason::None, static_cast<std::uint8_t>(r)}));
    } else if (std::holds_alternative<Verdict>(msg)) {
        ns_.table().remove(env.session_id);
    }
    return out;
}

std::vector<Envelope> World::deliver_to_mt(const Envelope& env, const ProtocolMessage& msg)
{
    std::vector<Envelope> out;
    if (!has_mt(env.mt_endpoint)) {
        return out;
    }
    MobileTerminal& terminal = mt(env.mt_endpoint);
    if (const auto* ch = std::get_if<Challenge>(&msg)) {
        const SessionInfo* info = session(env.session_id);
        const Party verifier =
            info != nullptr && info->sla == SlaMode::Decentralized ? Party::As : Party::Ns;
        auto result = terminal.handle_challenge(env.session_id, *ch, as_.params(), now_ns_);
        if (const auto* rsp = std::get_if<ResResponse>(&result)) {
            out.push_back(reply(env, Party::Mt, verifier, *rsp));
        } else {
            const Reason r = std::get<Reason>(result);
            if (r != Reason::UnsolicitedChallenge) {
                conclude(env.session_id, Outcome::RejectedByMt, r);
                out.push_back(reply(env, Party::Mt, verifier, Verdict{false, static_cast<std::uint8_t>(r)}));
            }
        }
    } else if (const auto* v = std::get_if<Verdict>(&msg)) {
        terminal.handle_verdict(env.session_id, *v);
    }
    return out;
}

std::optional<std::vector<Envelope>> World::step(Envelope env)
{
    env.sent_ns = now_ns_;
    const bool delivered = transport_.send(env);
    advance(transport_.hop_delay_ns());
    if (!delivered) {
        return std::nullopt;
    }
    if (env.to == Party::Mt && !has_mt(env.mt_endpoint)) {
        return std::vector<Envelope>{};
    }
    return deliver(env);
}

std::vector<Envelope> World::pump(std::vector<Envelope> outbox)
{
    std::deque<Envelope> queue(outbox.begin(), outbox.end());
    std::vector<Envelope> unclaimed;
    while (!queue.empty()) {
        Envelope env = std::move(queue.front());
        queue.pop_front();
        if (env.to == Party::Mt && !has_mt(env.mt_endpoint)) {
            // Still crosses the air; whoever listens on that endpoint gets it.
            if (step(env)) {
                unclaimed.push_back(std::move(env));
            }
            continue;
        }
        if (auto next = step(std::move(env))) {
            for (Envelope& e : *next) {
                queue.push_back(std::move(e));
            }
        }
    }
    return unclaimed;
}

std::uint32_t zone_at(const World& world, Position pos)
{
    return world.zones().zone_of(serving_cell(pos, world.aps()));
}

SessionVerdict run_session(World& world, std::uint32_t mt_id, SlaMode sla)
{
    const auto started = std::chrono::steady_clock::now();
    const std::size_t transcript_before = world.transport().transcript().size();
    SessionVerdict verdict;
    {
        CounterScope scope;
        MobileTerminal& terminal = world.mt(mt_id);
        verdict.session_id = world.open_session(mt_id, sla);
        auto init = terminal.initiate(verdict.session_id, sla, world.radio(), world.as().params(), world.now());
        if (const Reason* r = std::get_if<Reason>(&init)) {
            verdict.outcome = Outcome::RejectedByMt;
            verdict.reason = *r;
        } else {
            Envelope env;
            env.from = Party::Mt;
            env.to = Party::As;
            env.session_id = verdict.session_id;
            env.mt_endpoint = mt_id;
            env.cell_id = terminal.cell_id();
            env.payload = encode_message(std::get<AuthRequest>(init));
            world.pump({env});

            const SessionInfo* info = world.session(verdict.session_id);
            const bool mt_waiting =
                terminal.pending() && terminal.pending()->session_id == verdict.session_id;
            if (info->outcome && !mt_waiting) {
                verdict.outcome = *info->outcome;
                verdict.reason = info->reason;
            } else {
                // Lost message: the mobile gives up and servers purge at their deadlines.
                world.advance(world.as().params().response_timeout_ns);
                terminal.abandon(verdict.session_id);
                verdict.outcome = Outcome::TimedOut;
                verdict.reason = Reason::TimedOut;
            }
        }
        verdict.counters = scope.counters();
    }
    verdict.messages = world.transport().transcript().size() - transcript_before;
    verdict.counters.wall_ns = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - started)
            .count());
    return verdict;
}

SessionVerdict handover(World& world, std::uint32_t mt_id, SlaMode sla)
{
    MobileTerminal& terminal = world.mt(mt_id);
    if (world.as().params().zone_cache && terminal.fast_path(terminal.zone_id(), world.now())) {
        SessionVerdict v;
        v.outcome = Outcome::FastPathSuccess;
        return v;
    }
    return run_session(world, mt_id, sla);
}

} // namespace xlayer
