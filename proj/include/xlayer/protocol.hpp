#pragma once

// Three-party authentication engine: mobile terminal (MT), network slice
// (NS) and authentication slice (AS), exchanging encoded ProtocolMessages
// over a simulated transport.

#include "xlayer/aka.hpp"
#include "xlayer/counters.hpp"
#include "xlayer/fingerprint.hpp"
#include "xlayer/radio_env.hpp"
#include "xlayer/rng.hpp"
#include "xlayer/trusted_zone.hpp"
#include "xlayer/wire_codec.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace xlayer {

enum class SlaMode : std::uint8_t { Decentralized, Centralized };

// What the AuthRequest carries and how the AS checks it.
enum class AuthScheme : std::uint8_t {
    CrossLayer,      // fingerprint key, masked + encrypted TIM, k-NN zone check, AKA
    LegacyBaseline,  // IM and long-term key in clear, AKA; exists only as an attack target
    CryptoOnly,      // IM in clear, AKA under a static pre-shared key, no k-NN
    NonCrypto,       // RSS only: fingerprint + k-NN zone check, no AKA
};

enum class Reason : std::uint8_t {
    None = 0,
    DecryptFailed = 1,
    UnknownIdentity = 2,
    StaleRss = 3,
    ZoneRejected = 4,
    MacMismatch = 5,
    SqnOutOfRange = 6,
    UnsolicitedChallenge = 7,
    ResMismatch = 8,
    NoPendingEntry = 9,
    Expired = 10,
    HalfOpenCapacityExceeded = 11,
    DuplicatePending = 12,
    Malformed = 13,
    TimedOut = 14,
    NoApInRange = 15,
    CacheValid = 16,
    UnknownSession = 17,
};

const char* to_string(Reason r);

enum class Outcome : std::uint8_t {
    MutualAuthSuccess,
    FastPathSuccess,
    RejectedByAs,
    RejectedByMt,
    RejectedByNs,
    TimedOut,
};

const char* to_string(Outcome o);
const char* to_string(SlaMode m);
const char* to_string(AuthScheme s);

struct ProtocolParams {
    SlaMode sla = SlaMode::Centralized;
    AuthScheme scheme = AuthScheme::CrossLayer;
    bool zone_cache = true;
    std::uint32_t sqn_window = kDefaultSqnWindow;
    double epsilon = 0.0;  // 0 selects calibration
    double epsilon_headroom = 1.3;
    std::size_t k = kDefaultK;
    std::uint64_t freshness_ns = 2'000'000'000ULL;
    std::size_t half_open_capacity = 64;
    std::uint64_t response_timeout_ns = 500'000'000ULL;
    std::uint64_t cache_ttl_ns = 3'600'000'000'000ULL;
    Amf16 amf{0x80, 0x00};
};

enum class Party : std::uint8_t { Mt, Ns, As };

const char* to_string(Party p);

// Transport framing around one encoded message. `mt_endpoint` names the
// mobile side of the session; `cell_id` is the serving cell the request
// arrived through.
struct Envelope {
    Party from = Party::Mt;
    Party to = Party::As;
    std::uint32_t session_id = 0;
    std::uint32_t mt_endpoint = 0;
    std::uint32_t cell_id = 0;
    std::uint64_t sent_ns = 0;
    Bytes payload;
};

struct PendingEntry {
    std::uint32_t session_id = 0;
    Res64 xres{};
    std::uint64_t opened_ns = 0;
    std::uint64_t deadline_ns = 0;
};

struct PurgeRecord {
    std::uint32_t session_id = 0;
    std::uint64_t deadline_ns = 0;
    std::uint64_t purged_ns = 0;
};

/// Half-open authentication table: challenges waiting for a RES, bounded by
/// capacity, each with a deadline after which it is purged.
class HalfOpenTable {
public:
    HalfOpenTable(std::size_t capacity, std::uint64_t timeout_ns);

    Reason open(std::uint32_t session_id, const Res64& xres, std::uint64_t now_ns);
    // Removes the entry in every case where one exists.
    Reason verify(std::uint32_t session_id, const Res64& res, std::uint64_t now_ns);
    bool remove(std::uint32_t session_id);
    // Drops every entry whose deadline is <= now_ns.
    std::size_t purge(std::uint64_t now_ns);

    bool has(std::uint32_t session_id) const { return entries_.count(session_id) != 0; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t high_water() const { return high_water_; }
    std::uint64_t timeout_ns() const { return timeout_ns_; }
    std::optional<std::uint64_t> next_deadline() const;
    const std::vector<PurgeRecord>& purges() const { return purges_; }

private:
    std::size_t capacity_;
    std::uint64_t timeout_ns_;
    std::map<std::uint32_t, PendingEntry> entries_;
    std::size_t high_water_ = 0;
    std::vector<PurgeRecord> purges_;
};

struct CacheEntry {
    Key128 ck{};
    Key128 ik{};
    std::uint64_t expiry_ns = 0;
};

struct PendingInitiation {
    std::uint32_t session_id = 0;
    std::uint32_t zone_id = 0;
    Key128 key{};
    SlaMode sla = SlaMode::Centralized;
    bool answered = false;
};

/// Radio context the mobile samples from.
struct RadioContext {
    const std::vector<AccessPoint>* aps = nullptr;
    const EnvironmentConfig* cfg = nullptr;
};

class MobileTerminal {
public:
    MobileTerminal(std::uint32_t id, const Identity128& im, const Key128& long_term_key, Rng rng);

    std::uint32_t id() const { return id_; }
    const Identity128& im() const { return im_; }
    const Key128& long_term_key() const { return long_term_key_; }

    void place(Position pos, std::uint32_t cell_id, std::uint32_t zone_id);
    Position position() const { return position_; }
    std::uint32_t cell_id() const { return cell_id_; }
    std::uint32_t zone_id() const { return zone_id_; }

    const SqnState& sqn_state() const { return sqn_; }
    void set_sqn_window(std::uint32_t window) { sqn_.window = window; }
    const std::optional<PendingInitiation>& pending() const { return pending_; }
    const std::map<std::uint32_t, CacheEntry>& cache() const { return cache_; }

    // Step 1. Refused with CacheValid when the zone cache can serve the handover.
    std::variant<AuthRequest, Reason> initiate(std::uint32_t session_id, SlaMode sla, const RadioContext& radio,
                                               const ProtocolParams& params, std::uint64_t now_ns);

    // Step 3 on the mobile side. On acceptance the session keys enter the zone cache.
    std::variant<ResResponse, Reason> handle_challenge(std::uint32_t session_id, const Challenge& ch,
                                                       const ProtocolParams& params, std::uint64_t now_ns);

    void handle_verdict(std::uint32_t session_id, const Verdict& v);
    // Abandons the outstanding initiation (timeout); keys cached for it are dropped.
    void abandon(std::uint32_t session_id);

    // Handover inside an already authenticated zone.
    bool fast_path(std::uint32_t zone_id, std::uint64_t now_ns) const;

private:
    Nonce96 next_nonce();

    std::uint32_t id_;
    Identity128 im_;
    Key128 long_term_key_;
    Rng rng_;
    Position position_;
    std::uint32_t cell_id_ = 0;
    std::uint32_t zone_id_ = 0;
    SqnState sqn_;
    std::map<std::uint32_t, CacheEntry> cache_;
    std::optional<PendingInitiation> pending_;
    std::uint64_t nonce_counter_ = 0;
};

struct IssuedAv {
    AuthVector av;
    Sqn sqn = 0;
};

/// Result of the AS handling one request: an AV, a direct acceptance (RSS-only
/// scheme), or a rejection reason.
struct AsDecision {
    Reason reason = Reason::None;
    std::optional<IssuedAv> issued;
    bool accepted_without_av = false;
};

class AuthSlice {
public:
    AuthSlice(std::shared_ptr<const RadioMap> db, ZoneTable zones, std::int32_t noise_floor_cdbm,
              ProtocolParams params, Rng rng);

    void enroll(const Identity128& im, const Key128& long_term_key);
    bool enrolled(const Identity128& im) const { return registry_.count(im) != 0; }

    const ProtocolParams& params() const { return params_; }
    void set_epsilon(double eps) { params_.epsilon = eps; }
    const ZoneTable& zones() const { return zones_; }
    const RadioMap& db() const { return *db_; }

    // Step 2. `cell_id` is the serving cell the request came through; its zone is the claimed zone.
    AsDecision handle_request(const AuthRequest& req, std::uint32_t cell_id, std::uint64_t now_ns);

    // Last match computed by handle_request, for diagnostics.
    const std::optional<MatchResult>& last_match() const { return last_match_; }

    HalfOpenTable& table() { return table_; }
    const HalfOpenTable& table() const { return table_; }

private:
    AsDecision issue(const Identity128& im, const Key128& k);

    std::shared_ptr<const RadioMap> db_;
    ZoneTable zones_;
    std::int32_t noise_floor_cdbm_;
    ProtocolParams params_;
    Rng rng_;
    std::map<Identity128, Key128> registry_;
    std::map<Identity128, SqnIssuer> issued_;
    HalfOpenTable table_;
    std::optional<MatchResult> last_match_;
};

class NetworkSlice {
public:
    NetworkSlice(std::size_t capacity, std::uint64_t timeout_ns);

    // Records XRES with a deadline and strips it from what the MT receives.
    std::variant<Challenge, Reason> forward_challenge(std::uint32_t session_id, const AvToNs& av,
                                                      std::uint64_t now_ns);
    Reason verify(std::uint32_t session_id, const ResResponse& rsp, std::uint64_t now_ns);

    HalfOpenTable& table() { return table_; }
    const HalfOpenTable& table() const { return table_; }

private:
    HalfOpenTable table_;
};

struct TranscriptEntry {
    Envelope envelope;
    bool dropped = false;
};

/// In-process transport with seeded loss and fixed per-hop latency. Every
/// message handed to it is recorded, including the ones it drops.
class SimTransport {
public:
    SimTransport(double uplink_drop, double downlink_drop, std::uint64_t hop_delay_ns, Rng rng);

    // Returns false when the message is lost.
    bool send(const Envelope& env);

    std::uint64_t hop_delay_ns() const { return hop_delay_ns_; }
    const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
    void set_drop(double uplink, double downlink);

private:
    double uplink_drop_;
    double downlink_drop_;
    std::uint64_t hop_delay_ns_;
    Rng rng_;
    std::vector<TranscriptEntry> transcript_;
};

struct WorldConfig {
    EnvironmentConfig env;
    ProtocolParams protocol;
    std::size_t cells_per_zone = 4;
    std::uint32_t orientations = kDefaultOrientations;
    std::uint32_t samples_per_combo = kDefaultSamplesPerCombo;
    std::size_t subscribers = 16;
    double uplink_drop = 0.0;
    double downlink_drop = 0.0;
    std::uint64_t hop_delay_ns = 1'000'000ULL;
    std::size_t calibration_queries = 2000;
    // Prebuilt radio map; synthesized from env.seed when absent.
    std::shared_ptr<const RadioMap> radio_map;
};

// Zone table over the default deployment's cells.
ZoneTable default_zone_table(std::size_t cells_per_zone);

// Radio map a World built from `config` would synthesize (ignores config.radio_map).
RadioMap synthesize_world_map(const WorldConfig& config);

struct EpsilonCalibration {
    double p99 = 0.0;
    double epsilon = 0.0;
    std::vector<MatchSample> legitimate;
};

// Legitimate same-location queries: the mobile stands at a surveyed point
// with a random orientation and claims the zone of its serving cell.
std::vector<MatchSample> legitimate_match_samples(const RadioMap& db, const std::vector<AccessPoint>& aps,
                                                  const ZoneTable& zones, const EnvironmentConfig& cfg,
                                                  std::size_t k, std::size_t n, Rng& rng);

EpsilonCalibration calibrate_epsilon(const RadioMap& db, const std::vector<AccessPoint>& aps,
                                     const ZoneTable& zones, const EnvironmentConfig& cfg, std::size_t k,
                                     std::size_t n, double headroom, Rng& rng);

struct SessionVerdict {
    std::uint32_t session_id = 0;
    Outcome outcome = Outcome::TimedOut;
    Reason reason = Reason::None;
    CostCounters counters;
    std::size_t messages = 0;  // transcript entries produced by this session
};

struct SessionInfo {
    std::uint32_t mt_endpoint = 0;
    SlaMode sla = SlaMode::Centralized;
    std::optional<Outcome> outcome;
    Reason reason = Reason::None;
};

inline constexpr std::uint64_t kWorldEpochNs = 100'000'000'000ULL;

class World {
public:
    static World build(const WorldConfig& config);

    const WorldConfig& config() const { return config_; }
    const EnvironmentConfig& env() const { return config_.env; }
    const std::vector<AccessPoint>& aps() const { return aps_; }
    const ZoneTable& zones() const { return zones_; }
    const RadioMap& radio_map() const { return *db_; }
    std::shared_ptr<const RadioMap> radio_map_handle() const { return db_; }
    const std::vector<Position>& survey_points() const { return survey_points_; }
    const std::vector<CellSite>& sites() const { return sites_; }
    const EpsilonCalibration& calibration() const { return calibration_; }
    double epsilon() const { return as_.params().epsilon; }
    RadioContext radio() const { return RadioContext{&aps_, &config_.env}; }

    AuthSlice& as() { return as_; }
    NetworkSlice& ns() { return ns_; }
    SimTransport& transport() { return transport_; }
    const SimTransport& transport() const { return transport_; }
    std::vector<MobileTerminal>& mts() { return mts_; }
    MobileTerminal& mt(std::uint32_t id);
    bool has_mt(std::uint32_t id) const;

    // Enrolls a new subscriber with a fresh IM and long-term key.
    MobileTerminal& add_mt();
    void place_mt(std::uint32_t id, Position pos);

    std::uint64_t now() const { return now_ns_; }
    // Moves the clock forward and purges expired half-open entries.
    void advance(std::uint64_t ns);

    std::uint32_t open_session(std::uint32_t mt_endpoint, SlaMode sla);
    const SessionInfo* session(std::uint32_t session_id) const;

    // Handles one message at its recipient and returns the messages it emits.
    std::vector<Envelope> deliver(const Envelope& env);

    // Sends one message through the transport and delivers it. Empty when the
    // transport dropped it; unclaimed MT-bound messages are delivered to nobody.
    std::optional<std::vector<Envelope>> step(Envelope env);

    // Sends through the transport and delivers to completion; messages
    // addressed to MT endpoints without a terminal are returned to the caller.
    std::vector<Envelope> pump(std::vector<Envelope> outbox);

    Rng& rng() { return rng_; }

private:
    World(WorldConfig config, Rng rng);

    std::vector<Envelope> deliver_to_as(const Envelope& env, const ProtocolMessage& msg);
    std::vector<Envelope> deliver_to_ns(const Envelope& env, const ProtocolMessage& msg);
    std::vector<Envelope> deliver_to_mt(const Envelope& env, const ProtocolMessage& msg);
    Envelope reply(const Envelope& to_answer, Party from, Party to, const ProtocolMessage& msg) const;
    void conclude(std::uint32_t session_id, Outcome outcome, Reason reason);

    WorldConfig config_;
    Rng rng_;
    std::vector<AccessPoint> aps_;
    ZoneTable zones_;
    std::shared_ptr<const RadioMap> db_;
    std::vector<Position> survey_points_;
    std::vector<CellSite> sites_;
    EpsilonCalibration calibration_;
    AuthSlice as_;
    NetworkSlice ns_;
    SimTransport transport_;
    std::vector<MobileTerminal> mts_;
    std::uint64_t now_ns_ = kWorldEpochNs;
    std::uint32_t next_session_ = 1;
    std::map<std::uint32_t, SessionInfo> sessions_;
};

// Full Step 1 -> 3 exchange for one mobile at its current position.
SessionVerdict run_session(World& world, std::uint32_t mt_id, SlaMode sla);

// Fast path when the zone cache allows it, otherwise a full session.
SessionVerdict handover(World& world, std::uint32_t mt_id, SlaMode sla);

// Returns the serving cell's zone for a position.
std::uint32_t zone_at(const World& world, Position pos);

} // namespace xlayer
