#pragma once

// Scripted intruder. Each attack drives a World through its transport,
// observing and injecting messages as its capability flags allow, and
// reports how often it got what it was after.

#include "xlayer/protocol.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xlayer {

struct AdversaryCapabilities {
    bool observe_wire = true;   // reads every transcript
    bool inject = true;         // sends crafted messages
    bool delay_replay = true;   // stores and resends captured messages
    bool spoof_im = true;       // claims an arbitrary IM
    // Rebuilds the fingerprint key from RSS seen on the wire. Off by default:
    // it stands for knowledge of the victim's radio location.
    bool recompute_fingerprint = false;
    // Where the adversary transmits from; scenarios pick a spot outside the
    // victim zone when unset.
    std::optional<Position> position;

    static AdversaryCapabilities none();
};

struct AttackReport {
    std::string scenario;
    std::size_t attempts = 0;
    std::size_t successes = 0;
    std::string success_criterion;
    std::string transcript_digest;
    std::map<std::string, std::size_t> outcomes;               // rejection reasons seen
    std::vector<std::pair<std::string, std::string>> metrics;  // extra measurements, in insertion order

    double rate() const { return attempts == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(attempts); }
};

// Human-readable block followed by the machine line.
std::string format_report(const AttackReport& r);
// scenario=<name> attempts=<n> successes=<n> digest=<hex>
std::string report_line(const AttackReport& r);

// SHA-256 over every transcript entry of the world (header fields and payload).
std::string transcript_digest(const World& world);

std::size_t count_occurrences(ByteView haystack, ByteView needle);

struct SecretScan {
    std::size_t payloads = 0;
    std::size_t payloads_with_secret = 0;
    std::size_t keys_checked = 0;
    std::size_t occurrences = 0;
};

// Scans every transcript payload for the session keys k (recomputed from each
// AuthRequest's RSS) and for every subscriber's long-term key.
SecretScan scan_for_secrets(World& world);

AttackReport attack_legacy_key_over_air(World& world, const AdversaryCapabilities& caps, std::size_t n, Rng& rng);

enum class ReplayVariant { StaleRequest, InWindowRequest, Challenge };
AttackReport attack_replay(World& world, const AdversaryCapabilities& caps, ReplayVariant variant, std::size_t n,
                           Rng& rng);

enum class MitmVariant { KeyRecovery, TamperMac, TamperRand };
AttackReport attack_mitm(World& world, const AdversaryCapabilities& caps, MitmVariant variant, std::size_t n,
                         Rng& rng);

// Case 1: fake NS (stale AV, then live relay with RES reuse). Case 2: unsolicited challenges.
AttackReport attack_impersonation(World& world, const AdversaryCapabilities& caps, int which, std::size_t n,
                                  Rng& rng);

enum class SpoofVariant { Outside, Mapped, NoiseFloor };
inline constexpr double kDefaultSpoofDistance = 200.0;
AttackReport attack_location_spoof(World& world, const AdversaryCapabilities& caps, SpoofVariant variant,
                                   std::size_t n, Rng& rng, double min_distance = kDefaultSpoofDistance);

// Case 1: garbage-key requests. Case 2: valid requests under spoofed enrolled
// IMs from inside the zone, never answered.
AttackReport attack_dos_flood(World& world, const AdversaryCapabilities& caps, int which, std::size_t n_flood,
                              Rng& rng);

const std::vector<std::string>& scenario_names();

// Builds a world from `base` (switching the scheme where the scenario needs
// it) and runs the named scenario with default capabilities.
AttackReport run_scenario(const std::string& name, const WorldConfig& base, std::size_t n, std::uint64_t seed);

} // namespace xlayer
