#include "xlayer/adversary.hpp"

#include "xlayer/crypto.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace xlayer {

AdversaryCapabilities AdversaryCapabilities::none()
{
    AdversaryCapabilities c;
    c.observe_wire = false;
    c.inject = false;
    c.delay_replay = false;
    c.spoof_im = false;
    c.recompute_fingerprint = false;
    return c;
}

namespace {

constexpr std::uint32_t kAdversaryEndpointBase = 0xAD000000u;
// Outside every zone's survey area, still within range of the east APs.
constexpr Position kAdversaryHome{260.0, 100.0};

std::uint32_t adversary_endpoint(std::size_t i)
{
    return kAdversaryEndpointBase + static_cast<std::uint32_t>(i);
}

Party verifier_for(SlaMode sla)
{
    return sla == SlaMode::Centralized ? Party::Ns : Party::As;
}

SlaMode sla_for(std::size_t attempt)
{
    return attempt % 2 == 0 ? SlaMode::Centralized : SlaMode::Decentralized;
}

Envelope make_env(Party from, Party to, std::uint32_t session, std::uint32_t endpoint, std::uint32_t cell,
                  const ProtocolMessage& m)
{
    Envelope e;
    e.from = from;
    e.to = to;
    e.session_id = session;
    e.mt_endpoint = endpoint;
    e.cell_id = cell;
    e.payload = encode_message(m);
    return e;
}

std::optional<ProtocolMessage> peek(const Envelope& e)
{
    try {
        return decode_message(e.payload);
    } catch (const CodecError&) {
        return std::nullopt;
    }
}

template <typename T>
std::optional<T> peek_as(const Envelope& e)
{
    auto m = peek(e);
    if (m && std::holds_alternative<T>(*m)) {
        return std::get<T>(*m);
    }
    return std::nullopt;
}

// Hook sees each message before it is sent; returning false swallows it.
using WireHook = std::function<bool(Envelope&, std::deque<Envelope>&)>;

// Runs the world to quiescence with the adversary on the wire. Returns the
// messages that reached endpoints without a terminal (the adversary's own).
std::vector<Envelope> relay(World& w, std::vector<Envelope> outbox, const WireHook& hook = {})
{
    std::deque<Envelope> queue(outbox.begin(), outbox.end());
    std::vector<Envelope> unclaimed;
    while (!queue.empty()) {
        Envelope env = std::move(queue.front());
        queue.pop_front();
        if (hook && !hook(env, queue)) {
            continue;
        }
        const bool to_nobody = env.to == Party::Mt && !w.has_mt(env.mt_endpoint);
        auto next = w.step(env);
        if (!next) {
            continue;
        }
        if (to_nobody) {
            unclaimed.push_back(std::move(env));
            continue;
        }
        for (Envelope& e : *next) {
            queue.push_back(std::move(e));
        }
    }
    return unclaimed;
}

struct Victim {
    std::uint32_t mt = 0;
    std::uint32_t session = 0;
    SlaMode sla = SlaMode::Centralized;
    Key128 key{};
    Envelope request;
};

std::optional<Victim> start_victim(World& w, Rng& rng, SlaMode sla, std::optional<std::uint32_t> mt_id = {})
{
    const auto id = mt_id ? *mt_id : static_cast<std::uint32_t>(1 + rng.below(w.mts().size()));
    const auto& points = w.survey_points();
    w.place_mt(id, points[rng.below(points.size())]);
    MobileTerminal& m = w.mt(id);
    const ProtocolParams& params = w.as().params();
    if (params.zone_cache && m.fast_path(m.zone_id(), w.now())) {
        w.advance(params.cache_ttl_ns);
    }
    if (m.pending()) {
        m.abandon(m.pending()->session_id);
    }
    Victim v;
    v.mt = id;
    v.sla = sla;
    v.session = w.open_session(id, sla);
    auto init = m.initiate(v.session, sla, w.radio(), params, w.now());
    if (!std::holds_alternative<AuthRequest>(init)) {
        return std::nullopt;
    }
    v.key = m.pending()->key;
    v.request = make_env(Party::Mt, Party::As, v.session, id, m.cell_id(), std::get<AuthRequest>(init));
    return v;
}

bool session_succeeded(const World& w, std::uint32_t session)
{
    const SessionInfo* info = w.session(session);
    return info != nullptr && info->outcome && *info->outcome == Outcome::MutualAuthSuccess;
}

std::string session_reason(const World& w, std::uint32_t session)
{
    const SessionInfo* info = w.session(session);
    if (info == nullptr || !info->outcome) {
        return "NoVerdict";
    }
    if (*info->outcome == Outcome::MutualAuthSuccess) {
        return "Accepted";
    }
    return to_string(info->reason);
}

void tally(AttackReport& r, const std::string& what)
{
    ++r.outcomes[what];
}

void metric(AttackReport& r, const std::string& name, double value)
{
    std::ostringstream os;
    os << value;
    r.metrics.emplace_back(name, os.str());
}

void metric(AttackReport& r, const std::string& name, const std::string& value)
{
    r.metrics.emplace_back(name, value);
}

Nonce96 random_nonce(Rng& rng)
{
    Nonce96 n{};
    rng.fill(n);
    return n;
}

RssVector sample_at(World& w, Position p, Rng& rng)
{
    SampleOptions opts;
    opts.emit_ns = w.now();
    opts.orientation = static_cast<std::uint32_t>(rng.below(kDefaultOrientations));
    return sample_rss_vector(p, w.aps(), w.env(), rng, opts);
}

// A request exactly as a genuine terminal with identity `im` at `rss` would build it.
AuthRequest craft_request(const Identity128& im, const RssVector& rss, Rng& rng)
{
    AuthRequest req;
    const FingerprintKey fp = fingerprint(rss);
    req.nonce = random_nonce(rng);
    req.tim_ciphertext = encrypt_tim(mask_im(im, fp.key), fp.key, req.nonce);
    req.rss = rss;
    return req;
}

std::optional<Challenge> challenge_for(const std::vector<Envelope>& got, std::uint32_t session)
{
    for (const Envelope& e : got) {
        if (e.session_id == session) {
            if (auto ch = peek_as<Challenge>(e)) {
                return ch;
            }
        }
    }
    return std::nullopt;
}

void finish(AttackReport& r, const World& w)
{
    r.transcript_digest = transcript_digest(w);
}

} // namespace

std::string transcript_digest(const World& world)
{
    Bytes all;
    for (const TranscriptEntry& t : world.transport().transcript()) {
        const Envelope& e = t.envelope;
        all.push_back(static_cast<std::uint8_t>(e.from));
        all.push_back(static_cast<std::uint8_t>(e.to));
        for (std::uint64_t v : {std::uint64_t{e.session_id}, std::uint64_t{e.mt_endpoint}, std::uint64_t{e.cell_id},
                                e.sent_ns, std::uint64_t{e.payload.size()}}) {
            for (int i = 7; i >= 0; --i) {
                all.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
            }
        }
        all.push_back(t.dropped ? 1 : 0);
        all.insert(all.end(), e.payload.begin(), e.payload.end());
    }
    return to_hex(crypto::sha256(all));
}

std::size_t count_occurrences(ByteView haystack, ByteView needle)
{
    if (needle.empty() || haystack.size() < needle.size()) {
        return 0;
    }
    std::size_t n = 0;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), haystack.begin() + static_cast<std::ptrdiff_t>(i))) {
            ++n;
        }
    }
    return n;
}

SecretScan scan_for_secrets(World& world)
{
    std::set<Key128> keys;
    for (MobileTerminal& m : world.mts()) {
        keys.insert(m.long_term_key());
    }
    const auto& transcript = world.transport().transcript();
    for (const TranscriptEntry& t : transcript) {
        if (auto req = peek_as<AuthRequest>(t.envelope); req && !req->rss.readings.empty()) {
            keys.insert(fingerprint(req->rss).key);
        }
    }
    SecretScan scan;
    scan.keys_checked = keys.size();
    for (const TranscriptEntry& t : transcript) {
        const Bytes& p = t.envelope.payload;
        ++scan.payloads;
        std::size_t hits = 0;
        for (std::size_t i = 0; i + 16 <= p.size(); ++i) {
            Key128 window{};
            std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(i), 16, window.begin());
            hits += keys.count(window);
        }
        scan.occurrences += hits;
        scan.payloads_with_secret += hits != 0 ? 1 : 0;
    }
    return scan;
}

std::string report_line(const AttackReport& r)
{
    std::ostringstream os;
    os << "scenario=" << r.scenario << " attempts=" << r.attempts << " successes=" << r.successes
       << " digest=" << r.transcript_digest;
    return os.str();
}

std::string format_report(const AttackReport& r)
{
    std::ostringstream os;
    os << "scenario:  " << r.scenario << "\n";
    os << "criterion: " << r.success_criterion << "\n";
    os << "attempts:  " << r.attempts << "\n";
    os << "successes: " << r.successes << "\n";
    os << "rate:      " << r.rate() << "\n";
    if (!r.outcomes.empty()) {
        os << "outcomes:\n";
        for (const auto& [k, v] : r.outcomes) {
            os << "  " << k << " " << v << "\n";
        }
    }
    if (!r.metrics.empty()) {
        os << "metrics:\n";
        for (const auto& [k, v] : r.metrics) {
            os << "  " << k << " " << v << "\n";
        }
    }
    os << report_line(r) << "\n";
    return os.str();
}

// ---------------------------------------------------------------------------

AttackReport attack_legacy_key_over_air(World& w, const AdversaryCapabilities& caps, std::size_t n, Rng& rng)
{
    AttackReport r;
    r.scenario = "legacy";
    r.success_criterion = "impersonated session reaches MutualAuthSuccess with key read off the wire";
    std::size_t keys_recovered = 0;
    const Position home = caps.position.value_or(kAdversaryHome);
    for (std::size_t i = 0; i < n; ++i) {
        ++r.attempts;
        const SlaMode sla = sla_for(i);
        auto v = start_victim(w, rng, sla);
        if (!v) {
            tally(r, "VictimNotStarted");
            continue;
        }
        std::optional<AuthRequest> seen;
        relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>&) {
            if (caps.observe_wire && e.session_id == v->session && e.from == Party::Mt) {
                if (auto req = peek_as<AuthRequest>(e)) {
                    seen = req;
                }
            }
            return true;
        });

        // Read the identity/key fields as the legacy layout places them.
        Identity128 im{};
        Key128 k{};
        if (seen && seen->tim_ciphertext.size() == 32) {
            std::copy_n(seen->tim_ciphertext.begin(), 16, im.begin());
            std::copy_n(seen->tim_ciphertext.begin() + 16, 16, k.begin());
        } else {
            rng.fill(im);
            rng.fill(k);
        }
        if (k == w.mt(v->mt).long_term_key()) {
            ++keys_recovered;
        }
        if (!caps.inject) {
            tally(r, "NoInject");
            continue;
        }

        const std::uint32_t ep = adversary_endpoint(i);
        const std::uint32_t s = w.open_session(ep, sla);
        AuthRequest forged;
        forged.tim_ciphertext.assign(im.begin(), im.end());
        forged.tim_ciphertext.insert(forged.tim_ciphertext.end(), k.begin(), k.end());
        forged.nonce = random_nonce(rng);
        try {
            forged.rss = seen ? seen->rss : sample_at(w, home, rng);
        } catch (const RadioError&) {
            tally(r, "NoApInRange");
            continue;
        }
        const std::uint32_t cell = w.mt(v->mt).cell_id();
        auto got = relay(w, {make_env(Party::Mt, Party::As, s, ep, cell, forged)});
        if (auto ch = challenge_for(got, s)) {
            const Res64 res = Milenage(k).f2(ch->rand);
            relay(w, {make_env(Party::Mt, verifier_for(sla), s, ep, cell, ResResponse{res})});
        }
        if (session_succeeded(w, s)) {
            ++r.successes;
        }
        tally(r, session_reason(w, s));
    }
    metric(r, "keys_recovered", static_cast<double>(keys_recovered));
    finish(r, w);
    return r;
}

AttackReport attack_replay(World& w, const AdversaryCapabilities& caps, ReplayVariant variant, std::size_t n,
                           Rng& rng)
{
    AttackReport r;
    const bool can_replay = caps.observe_wire && caps.delay_replay && caps.inject;
    std::size_t victims_ok = 0;
    switch (variant) {
    case ReplayVariant::StaleRequest:
        r.scenario = "replay";
        r.success_criterion = "captured AuthRequest replayed after the freshness window yields MutualAuthSuccess";
        break;
    case ReplayVariant::InWindowRequest:
        r.scenario = "replay-window";
        r.success_criterion = "AuthRequest replayed before the original completes yields MutualAuthSuccess";
        break;
    case ReplayVariant::Challenge:
        r.scenario = "challenge-replay";
        r.success_criterion = "MT answers a replayed Challenge with a RES";
        break;
    }

    for (std::size_t i = 0; i < n; ++i) {
        ++r.attempts;
        const SlaMode sla = sla_for(i);
        auto v = start_victim(w, rng, sla);
        if (!v) {
            tally(r, "VictimNotStarted");
            continue;
        }
        const std::uint32_t ep = adversary_endpoint(i);
        const std::uint32_t cell = v->request.cell_id;

        if (variant == ReplayVariant::StaleRequest) {
            std::optional<Envelope> request;
            std::optional<ResResponse> res;
            relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>&) {
                if (caps.observe_wire && e.session_id == v->session && e.from == Party::Mt) {
                    if (peek_as<AuthRequest>(e)) {
                        request = e;
                    } else if (auto rr = peek_as<ResResponse>(e)) {
                        res = rr;
                    }
                }
                return true;
            });
            victims_ok += session_succeeded(w, v->session) ? 1 : 0;
            if (!can_replay || !request) {
                tally(r, "NoCapture");
                continue;
            }
            w.advance(w.as().params().freshness_ns + 1);
            const std::uint32_t s = w.open_session(ep, sla);
            Envelope again = *request;
            again.session_id = s;
            again.mt_endpoint = ep;
            auto got = relay(w, {again});
            if (challenge_for(got, s) && res) {
                relay(w, {make_env(Party::Mt, verifier_for(sla), s, ep, cell, *res)});
            }
            r.successes += session_succeeded(w, s) ? 1 : 0;
            tally(r, session_reason(w, s));
        } else if (variant == ReplayVariant::InWindowRequest) {
            const std::uint32_t s = w.open_session(ep, sla);
            bool injected = false;
            std::optional<ResResponse> victim_res;
            auto got = relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>& q) {
                if (e.session_id != v->session || e.from != Party::Mt || !caps.observe_wire) {
                    return true;
                }
                if (peek_as<AuthRequest>(e) && can_replay && !injected) {
                    Envelope copy = e;
                    copy.session_id = s;
                    copy.mt_endpoint = ep;
                    q.push_front(copy);
                    injected = true;
                } else if (auto rr = peek_as<ResResponse>(e)) {
                    victim_res = rr;
                }
                return true;
            });
            victims_ok += session_succeeded(w, v->session) ? 1 : 0;
            if (!injected) {
                tally(r, "NoCapture");
                continue;
            }
            if (auto ch = challenge_for(got, s)) {
                // No key, so the best on offer is the victim's own RES.
                Res64 guess{};
                if (victim_res) {
                    guess = victim_res->res;
                } else {
                    rng.fill(guess);
                }
                relay(w, {make_env(Party::Mt, verifier_for(sla), s, ep, cell, ResResponse{guess})});
            }
            r.successes += session_succeeded(w, s) ? 1 : 0;
            tally(r, session_reason(w, s));
        } else {
            std::optional<Envelope> saved;
            bool replayed = false;
            bool accepted = false;
            relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>& q) {
                if (e.session_id != v->session || !caps.observe_wire) {
                    return true;
                }
                if (e.to == Party::Mt && peek_as<Challenge>(e) && !saved) {
                    saved = e;
                } else if (e.from == Party::Mt && peek_as<ResResponse>(e)) {
                    if (replayed) {
                        accepted = true;
                    } else if (saved && caps.delay_replay && caps.inject) {
                        q.push_front(*saved);
                        replayed = true;
                    }
                } else if (e.from == Party::Mt && replayed) {
                    if (auto verdict = peek_as<Verdict>(e)) {
                        tally(r, to_string(static_cast<Reason>(verdict->reason)));
                    }
                }
                return true;
            });
            victims_ok += session_succeeded(w, v->session) ? 1 : 0;
            if (!replayed) {
                tally(r, "NoCapture");
                continue;
            }
            // Once more after the session has closed.
            auto out = w.step(*saved);
            if (out) {
                if (out->empty()) {
                    tally(r, "UnsolicitedChallenge");
                }
                for (const Envelope& e : *out) {
                    if (peek_as<ResResponse>(e)) {
                        accepted = true;
                    }
                }
            }
            r.successes += accepted ? 1 : 0;
        }
    }
    metric(r, "victim_sessions_succeeded", static_cast<double>(victims_ok));
    finish(r, w);
    return r;
}

AttackReport attack_mitm(World& w, const AdversaryCapabilities& caps, MitmVariant variant, std::size_t n, Rng& rng)
{
    AttackReport r;
    switch (variant) {
    case MitmVariant::KeyRecovery:
        r.scenario = caps.recompute_fingerprint ? "mitm-recompute" : "mitm";
        r.success_criterion = "CK of the observed session derived from transcript material";
        break;
    case MitmVariant::TamperMac:
        r.scenario = "challenge-tamper";
        r.success_criterion = "MT answers a Challenge with one AUTN MAC bit flipped";
        break;
    case MitmVariant::TamperRand:
        r.scenario = "rand-tamper";
        r.success_criterion = "MT answers a Challenge with one RAND bit flipped";
        break;
    }
    std::size_t candidates_tried = 0;

    for (std::size_t i = 0; i < n; ++i) {
        ++r.attempts;
        const SlaMode sla = sla_for(i);
        auto v = start_victim(w, rng, sla);
        if (!v) {
            tally(r, "VictimNotStarted");
            continue;
        }

        if (variant == MitmVariant::KeyRecovery) {
            std::vector<Bytes> seen;
            std::optional<Rand128> rand;
            std::optional<AuthRequest> request;
            relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>&) {
                if (e.session_id == v->session) {
                    if (auto ch = peek_as<Challenge>(e)) {
                        rand = ch->rand;
                    }
                    if (caps.observe_wire) {
                        seen.push_back(e.payload);
                        if (auto req = peek_as<AuthRequest>(e)) {
                            request = req;
                        }
                    }
                }
                return true;
            });
            if (!rand) {
                tally(r, "NoChallenge:" + session_reason(w, v->session));
                continue;
            }
            const Key128 true_ck = Milenage(v->key).f3(*rand);
            std::set<Key128> candidates;
            for (const Bytes& p : seen) {
                for (std::size_t off = 0; off + 16 <= p.size(); ++off) {
                    Key128 c{};
                    std::copy_n(p.begin() + static_cast<std::ptrdiff_t>(off), 16, c.begin());
                    candidates.insert(c);
                }
            }
            if (caps.recompute_fingerprint && request) {
                candidates.insert(fingerprint(request->rss).key);
            }
            if (candidates.empty()) {
                Key128 guess{};
                rng.fill(guess);
                candidates.insert(guess);
            }
            bool found = false;
            for (const Key128& c : candidates) {
                ++candidates_tried;
                if (Milenage(c).f3(*rand) == true_ck) {
                    found = true;
                    break;
                }
            }
            r.successes += found ? 1 : 0;
            tally(r, found ? "KeyRecovered" : "NoKey");
            continue;
        }

        bool tampered = false;
        bool accepted = false;
        relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>&) {
            if (e.session_id != v->session) {
                return true;
            }
            if (e.to == Party::Mt && caps.inject && !tampered && peek_as<Challenge>(e)) {
                // Payload: tag | RAND(16) | AUTN(16); MAC is the last 8 bytes of AUTN.
                const std::size_t at = variant == MitmVariant::TamperMac ? 1 + 16 + 8 + rng.below(8) : 1 + rng.below(16);
                e.payload[at] ^= static_cast<std::uint8_t>(1u << rng.below(8));
                tampered = true;
            } else if (e.from == Party::Mt && tampered) {
                if (peek_as<ResResponse>(e)) {
                    accepted = true;
                } else if (auto verdict = peek_as<Verdict>(e)) {
                    tally(r, to_string(static_cast<Reason>(verdict->reason)));
                }
            }
            return true;
        });
        if (!tampered) {
            tally(r, "NoTamper");
            continue;
        }
        r.successes += accepted ? 1 : 0;
    }
    if (variant == MitmVariant::KeyRecovery) {
        metric(r, "candidate_keys_tried", static_cast<double>(candidates_tried));
    }
    finish(r, w);
    return r;
}

AttackReport attack_impersonation(World& w, const AdversaryCapabilities& caps, int which, std::size_t n, Rng& rng)
{
    if (which != 1 && which != 2) {
        throw std::invalid_argument("impersonation case must be 1 or 2");
    }
    AttackReport r;
    r.scenario = which == 1 ? "impersonation-1" : "impersonation-2";
    r.success_criterion = which == 1 ? "fake NS gets the MT to answer a stale AV, or reuses a relayed RES successfully"
                                     : "MT answers a Challenge it never asked for";
    std::size_t stale_accepted = 0;
    std::size_t reuse_accepted = 0;
    std::optional<Challenge> pool;

    for (std::size_t i = 0; i < n; ++i) {
        ++r.attempts;
        const SlaMode sla = sla_for(i);
        const std::uint32_t ep = adversary_endpoint(i);

        if (which == 2) {
            if (caps.observe_wire && (!pool || i % 10 == 0)) {
                // Harvest a genuine challenge from some session to inject later.
                if (auto v = start_victim(w, rng, sla)) {
                    relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>&) {
                        if (auto ch = peek_as<Challenge>(e)) {
                            pool = ch;
                        }
                        return true;
                    });
                }
            }
            if (!caps.inject) {
                tally(r, "NoInject");
                continue;
            }
            Challenge ch;
            if (pool) {
                ch = *pool;
            } else {
                rng.fill(ch.rand);
                rng.fill(ch.autn);
            }
            const auto target = static_cast<std::uint32_t>(1 + rng.below(w.mts().size()));
            MobileTerminal& m = w.mt(target);
            if (m.pending()) {
                m.abandon(m.pending()->session_id);
            }
            const std::uint32_t s = w.open_session(target, sla);
            auto out = w.step(make_env(verifier_for(sla), Party::Mt, s, target, m.cell_id(), ch));
            bool answered = false;
            if (out) {
                for (const Envelope& e : *out) {
                    if (peek_as<ResResponse>(e)) {
                        answered = true;
                    } else if (auto verdict = peek_as<Verdict>(e)) {
                        tally(r, to_string(static_cast<Reason>(verdict->reason)));
                    }
                }
                if (out->empty()) {
                    tally(r, "UnsolicitedChallenge");
                }
            }
            r.successes += answered ? 1 : 0;
            continue;
        }

        // Case 1a: an earlier session of the victim supplies the stale AV.
        auto first = start_victim(w, rng, sla);
        if (!first) {
            tally(r, "VictimNotStarted");
            continue;
        }
        std::optional<Envelope> stale;
        relay(w, {first->request}, [&](Envelope& e, std::deque<Envelope>&) {
            if (caps.observe_wire && e.session_id == first->session && e.to == Party::Mt && peek_as<Challenge>(e)) {
                stale = e;
            }
            return true;
        });
        bool stale_ok = false;
        if (stale && caps.delay_replay && caps.inject) {
            auto v = start_victim(w, rng, sla, first->mt);
            if (v) {
                bool swapped = false;
                relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>&) {
                    if (e.session_id != v->session) {
                        return true;
                    }
                    if (e.to == Party::Mt && !swapped && peek_as<Challenge>(e)) {
                        e.payload = stale->payload;
                        swapped = true;
                    } else if (e.from == Party::Mt && swapped) {
                        if (peek_as<ResResponse>(e)) {
                            stale_ok = true;
                        } else if (auto verdict = peek_as<Verdict>(e)) {
                            tally(r, std::string("stale:") + to_string(static_cast<Reason>(verdict->reason)));
                        }
                    }
                    return true;
                });
            }
        }

        // Case 1b: relay a live AV untouched, keep the RES, try it in a session of our own.
        bool reuse_ok = false;
        auto v = start_victim(w, rng, sla, first->mt);
        if (v) {
            std::optional<Envelope> request;
            std::optional<ResResponse> res;
            relay(w, {v->request}, [&](Envelope& e, std::deque<Envelope>&) {
                if (caps.observe_wire && e.session_id == v->session && e.from == Party::Mt) {
                    if (peek_as<AuthRequest>(e)) {
                        request = e;
                    } else if (auto rr = peek_as<ResResponse>(e)) {
                        res = rr;
                    }
                }
                return true;
            });
            if (request && res && caps.inject && caps.delay_replay) {
                const std::uint32_t s = w.open_session(ep, sla);
                Envelope again = *request;
                again.session_id = s;
                again.mt_endpoint = ep;
                auto got = relay(w, {again});
                if (challenge_for(got, s)) {
                    relay(w, {make_env(Party::Mt, verifier_for(sla), s, ep, again.cell_id, *res)});
                }
                reuse_ok = session_succeeded(w, s);
                tally(r, std::string("reuse:") + session_reason(w, s));
            }
        }
        stale_accepted += stale_ok ? 1 : 0;
        reuse_accepted += reuse_ok ? 1 : 0;
        r.successes += (stale_ok || reuse_ok) ? 1 : 0;
    }
    if (which == 1) {
        metric(r, "stale_av_accepted", static_cast<double>(stale_accepted));
        metric(r, "relayed_res_reused", static_cast<double>(reuse_accepted));
    }
    finish(r, w);
    return r;
}

AttackReport attack_location_spoof(World& w, const AdversaryCapabilities& caps, SpoofVariant variant,
                                   std::size_t n, Rng& rng, double min_distance)
{
    AttackReport r;
    switch (variant) {
    case SpoofVariant::Outside:
        r.scenario = "location-spoof";
        break;
    case SpoofVariant::Mapped:
        r.scenario = "location-spoof-mapped";
        break;
    case SpoofVariant::NoiseFloor:
        r.scenario = "location-spoof-noise";
        break;
    }
    r.success_criterion = "AS issues an AV for a request claiming a victim zone";

    Identity128 own_im{};
    rng.fill(own_im);
    const std::vector<std::uint32_t> zone_ids = w.zones().zone_ids();
    std::vector<double> distances;
    double nearest_mapped = 1e18;

    for (std::size_t i = 0; i < n; ++i) {
        ++r.attempts;
        const SlaMode sla = sla_for(i);
        const std::uint32_t zone = zone_ids[rng.below(zone_ids.size())];
        const std::vector<std::uint32_t> cells = w.zones().cells_in(zone);
        const std::uint32_t cell = cells[rng.below(cells.size())];
        std::vector<Position> zone_points;
        for (const Position& p : w.survey_points()) {
            if (zone_at(w, p) == zone) {
                zone_points.push_back(p);
            }
        }
        auto gap = [&](Position p) {
            double d = 1e18;
            for (const Position& q : zone_points) {
                d = std::min(d, distance(p, q));
            }
            return d;
        };
        const Identity128 im = caps.spoof_im ? w.mts()[rng.below(w.mts().size())].im() : own_im;

        RssVector rss;
        try {
            if (variant == SpoofVariant::NoiseFloor) {
                for (const AccessPoint& ap : w.aps()) {
                    rss.readings.push_back(RssReading{ap.ap_id, w.env().noise_floor_cdbm, w.now()});
                }
            } else {
                Position p;
                if (variant == SpoofVariant::Mapped) {
                    p = zone_points[rng.below(zone_points.size())];
                } else if (caps.position && gap(*caps.position) >= min_distance) {
                    p = *caps.position;
                } else {
                    do {
                        p = Position{rng.uniform(-250.0, 450.0), rng.uniform(-250.0, 450.0)};
                    } while (gap(p) < min_distance);
                }
                nearest_mapped = std::min(nearest_mapped, gap(p));
                rss = sample_at(w, p, rng);
            }
        } catch (const RadioError&) {
            tally(r, "NoApInRange");
            continue;
        }
        if (!caps.inject) {
            tally(r, "NoInject");
            continue;
        }
        const std::uint32_t ep = adversary_endpoint(i);
        const std::uint32_t s = w.open_session(ep, sla);
        bool issued = false;
        relay(w, {make_env(Party::Mt, Party::As, s, ep, cell, craft_request(im, rss, rng))},
              [&](Envelope& e, std::deque<Envelope>&) {
                  if (e.session_id == s && e.from == Party::As
                      && (peek_as<AvToNs>(e) || peek_as<Challenge>(e))) {
                      issued = true;
                  }
                  return true;
              });
        if (w.as().last_match()) {
            distances.push_back(w.as().last_match()->k_dh);
        }
        r.successes += issued ? 1 : 0;
        tally(r, issued ? "AvIssued" : session_reason(w, s));
        w.advance(w.as().params().response_timeout_ns);
    }
    metric(r, "epsilon", w.epsilon());
    if (!distances.empty()) {
        std::sort(distances.begin(), distances.end());
        metric(r, "k_dh_min", distances.front());
        metric(r, "k_dh_median", distances[distances.size() / 2]);
    }
    if (variant == SpoofVariant::Outside) {
        metric(r, "min_distance_to_zone_m", nearest_mapped);
    }
    finish(r, w);
    return r;
}

AttackReport attack_dos_flood(World& w, const AdversaryCapabilities& caps, int which, std::size_t n_flood, Rng& rng)
{
    if (which != 1 && which != 2) {
        throw std::invalid_argument("dos case must be 1 or 2");
    }
    AttackReport r;
    r.scenario = which == 1 ? "dos-1" : "dos-2";
    r.success_criterion =
        "half-open table exceeds capacity, a flood entry outlives its deadline, or the legitimate session fails";
    r.attempts = n_flood;
    const SlaMode sla = w.as().params().sla;
    HalfOpenTable& table = sla == SlaMode::Centralized ? w.ns().table() : w.as().table();
    const std::size_t capacity = table.capacity();
    const std::size_t purges_before = table.purges().size();

    // Case 2 is granted a spot inside the zone; case 1 needs no location.
    const Position inside = w.survey_points()[rng.below(w.survey_points().size())];
    const Position spot = caps.position.value_or(which == 2 ? inside : kAdversaryHome);
    const std::uint32_t cell = serving_cell(inside, w.aps());

    // The legitimate session belongs to a bystander whose IM the flood does not claim.
    const auto bystander = static_cast<std::uint32_t>(1 + rng.below(w.mts().size()));
    std::vector<std::uint32_t> spoofed;
    for (const MobileTerminal& m : w.mts()) {
        if (m.id() != bystander) {
            spoofed.push_back(m.id());
        }
    }

    std::vector<Envelope> outbox;
    std::set<std::uint32_t> flood_sessions;
    std::optional<Victim> victim;
    if (caps.inject) {
        for (std::size_t j = 0; j < n_flood; ++j) {
            if (j == n_flood / 2) {
                victim = start_victim(w, rng, sla, bystander);
                if (victim) {
                    outbox.push_back(victim->request);
                }
            }
            const std::uint32_t ep = adversary_endpoint(j);
            const std::uint32_t s = w.open_session(ep, sla);
            flood_sessions.insert(s);
            RssVector rss = sample_at(w, spot, rng);
            AuthRequest req;
            if (which == 1) {
                req.tim_ciphertext.resize(32);
                rng.fill(req.tim_ciphertext);
                req.nonce = random_nonce(rng);
                req.rss = std::move(rss);
            } else {
                Identity128 im{};
                if (caps.spoof_im && !spoofed.empty()) {
                    im = w.mt(spoofed[rng.below(spoofed.size())]).im();
                } else {
                    rng.fill(im);
                }
                req = craft_request(im, rss, rng);
            }
            outbox.push_back(make_env(Party::Mt, Party::As, s, ep, cell, req));
        }
    }
    if (!victim) {
        victim = start_victim(w, rng, sla, bystander);
        if (victim) {
            outbox.push_back(victim->request);
        }
    }

    std::size_t max_size = 0;
    std::size_t overflow_events = 0;
    std::set<std::uint32_t> opened;
    std::size_t refused = 0;
    auto watch = [&] {
        max_size = std::max(max_size, table.size());
        if (table.size() > capacity) {
            ++overflow_events;
        }
    };
    auto got = relay(w, outbox, [&](Envelope& e, std::deque<Envelope>&) {
        watch();
        if (flood_sessions.count(e.session_id) != 0 && e.to == Party::Mt) {
            if (peek_as<Challenge>(e)) {
                opened.insert(e.session_id);
            } else if (auto verdict = peek_as<Verdict>(e)) {
                const auto reason = static_cast<Reason>(verdict->reason);
                if (reason == Reason::HalfOpenCapacityExceeded) {
                    ++refused;
                }
                tally(r, to_string(reason));
            }
        }
        return true;
    });
    watch();

    std::string legit_first = "NotRun";
    std::string legit_final = "NotRun";
    bool legit_ok = false;
    if (victim) {
        legit_first = session_reason(w, victim->session);
        legit_ok = session_succeeded(w, victim->session)
                   && !(w.mt(victim->mt).pending() && w.mt(victim->mt).pending()->session_id == victim->session);
        legit_final = legit_first;
    }
    // Let every flood entry run out.
    w.advance(table.timeout_ns());
    watch();
    if (victim && !legit_ok) {
        MobileTerminal& m = w.mt(victim->mt);
        if (m.pending()) {
            m.abandon(m.pending()->session_id);
        }
        const SessionVerdict retry = run_session(w, victim->mt, sla);
        legit_ok = retry.outcome == Outcome::MutualAuthSuccess;
        legit_final = legit_ok ? "Accepted" : to_string(retry.reason);
    }

    std::size_t late = 0;
    std::uint64_t worst_latency = 0;
    std::set<std::uint32_t> purged;
    for (std::size_t p = purges_before; p < table.purges().size(); ++p) {
        const PurgeRecord& rec = table.purges()[p];
        if (opened.count(rec.session_id) == 0) {
            continue;
        }
        purged.insert(rec.session_id);
        worst_latency = std::max(worst_latency, rec.purged_ns - rec.deadline_ns);
        if (rec.purged_ns != rec.deadline_ns) {
            ++late;
        }
    }
    std::size_t never_purged = 0;
    for (std::uint32_t s : opened) {
        never_purged += purged.count(s) == 0 ? 1 : 0;
    }

    // Each spoofed request consumed an SQN for that IM; measure what it did to one owner.
    std::string spoofed_owner = "NotRun";
    if (which == 2 && caps.inject && caps.spoof_im && !spoofed.empty()) {
        const std::uint32_t owner = spoofed[rng.below(spoofed.size())];
        w.place_mt(owner, w.survey_points()[rng.below(w.survey_points().size())]);
        MobileTerminal& m = w.mt(owner);
        if (m.fast_path(m.zone_id(), w.now())) {
            w.advance(w.as().params().cache_ttl_ns);
        }
        const SessionVerdict after = run_session(w, owner, sla);
        spoofed_owner = after.outcome == Outcome::MutualAuthSuccess ? "Accepted" : to_string(after.reason);
    }

    r.successes = std::min(r.attempts, overflow_events + late + never_purged + (legit_ok ? 0 : 1));
    metric(r, "capacity", static_cast<double>(capacity));
    metric(r, "max_table_size", static_cast<double>(max_size));
    metric(r, "flood_entries_opened", static_cast<double>(opened.size()));
    metric(r, "flood_refused_at_capacity", static_cast<double>(refused));
    metric(r, "flood_entries_purged", static_cast<double>(purged.size()));
    metric(r, "max_purge_latency_ns", static_cast<double>(worst_latency));
    metric(r, "responses_to_adversary", static_cast<double>(got.size()));
    metric(r, "table_size_after", static_cast<double>(table.size()));
    metric(r, "legit_first", legit_first);
    metric(r, "legit_final", legit_final);
    if (which == 2) {
        metric(r, "spoofed_owner_after_flood", spoofed_owner);
    }
    finish(r, w);
    return r;
}

const std::vector<std::string>& scenario_names()
{
    static const std::vector<std::string> names = {
        "legacy",           "key-over-air",   "replay",          "replay-window",        "challenge-replay",
        "mitm",             "mitm-recompute", "challenge-tamper", "rand-tamper",         "impersonation-1",
        "impersonation-2",  "location-spoof", "location-spoof-mapped", "location-spoof-noise", "dos-1",
        "dos-2",            "secret-scan",
    };
    return names;
}

AttackReport run_scenario(const std::string& name, const WorldConfig& base, std::size_t n, std::uint64_t seed)
{
    const auto& names = scenario_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw std::invalid_argument("unknown scenario: " + name);
    }
    WorldConfig cfg = base;
    cfg.env.seed = seed;
    if (name == "legacy") {
        cfg.protocol.scheme = AuthScheme::LegacyBaseline;
    }
    World w = World::build(cfg);
    Rng rng = Rng(seed).fork("adversary:" + name);
    AdversaryCapabilities caps;

    if (name == "legacy" || name == "key-over-air") {
        AttackReport r = attack_legacy_key_over_air(w, caps, n, rng);
        r.scenario = name;
        return r;
    }
    if (name == "replay") {
        return attack_replay(w, caps, ReplayVariant::StaleRequest, n, rng);
    }
    if (name == "replay-window") {
        return attack_replay(w, caps, ReplayVariant::InWindowRequest, n, rng);
    }
    if (name == "challenge-replay") {
        return attack_replay(w, caps, ReplayVariant::Challenge, n, rng);
    }
    if (name == "mitm") {
        return attack_mitm(w, caps, MitmVariant::KeyRecovery, n, rng);
    }
    if (name == "mitm-recompute") {
        caps.recompute_fingerprint = true;
        return attack_mitm(w, caps, MitmVariant::KeyRecovery, n, rng);
    }
    if (name == "challenge-tamper") {
        return attack_mitm(w, caps, MitmVariant::TamperMac, n, rng);
    }
    if (name == "rand-tamper") {
        return attack_mitm(w, caps, MitmVariant::TamperRand, n, rng);
    }
    if (name == "impersonation-1") {
        return attack_impersonation(w, caps, 1, n, rng);
    }
    if (name == "impersonation-2") {
        return attack_impersonation(w, caps, 2, n, rng);
    }
    if (name == "location-spoof") {
        return attack_location_spoof(w, caps, SpoofVariant::Outside, n, rng);
    }
    if (name == "location-spoof-mapped") {
        return attack_location_spoof(w, caps, SpoofVariant::Mapped, n, rng);
    }
    if (name == "location-spoof-noise") {
        return attack_location_spoof(w, caps, SpoofVariant::NoiseFloor, n, rng);
    }
    if (name == "dos-1") {
        return attack_dos_flood(w, caps, 1, n, rng);
    }
    if (name == "dos-2") {
        return attack_dos_flood(w, caps, 2, n, rng);
    }

    // secret-scan: n ordinary sessions, then a byte scan of everything sent.
    AttackReport r;
    r.scenario = name;
    r.success_criterion = "a fingerprint key or long-term key appears verbatim in any payload";
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<std::uint32_t>(1 + rng.below(w.mts().size()));
        w.place_mt(id, w.survey_points()[rng.below(w.survey_points().size())]);
        MobileTerminal& m = w.mt(id);
        if (m.fast_path(m.zone_id(), w.now())) {
            w.advance(w.as().params().cache_ttl_ns);
        }
        const SessionVerdict v = run_session(w, id, sla_for(i));
        tally(r, v.outcome == Outcome::MutualAuthSuccess ? "Accepted" : to_string(v.reason));
    }
    const SecretScan scan = scan_for_secrets(w);
    r.attempts = scan.payloads;
    r.successes = scan.payloads_with_secret;
    metric(r, "sessions", static_cast<double>(n));
    metric(r, "occurrences", static_cast<double>(scan.occurrences));
    metric(r, "keys_checked", static_cast<double>(scan.keys_checked));
    finish(r, w);
    return r;
}

} // namespace xlayer
