#pragma once

#include "xlayer/protocol.hpp"

namespace xlayer::testworld {

// Default world config with the radio map and epsilon computed once, so
// each test can build a fresh world without re-running calibration.
inline const WorldConfig& base()
{
    static const WorldConfig cfg = [] {
        WorldConfig c;
        const World w = World::build(c);
        c.radio_map = w.radio_map_handle();
        c.protocol.epsilon = w.epsilon();
        return c;
    }();
    return cfg;
}

inline World fresh(SlaMode sla = SlaMode::Centralized)
{
    WorldConfig c = base();
    c.protocol.sla = sla;
    return World::build(c);
}

inline Envelope request_envelope(const World& w, std::uint32_t mt_id, std::uint32_t session_id, const AuthRequest& req,
                                 std::uint32_t cell_id)
{
    (void)w;
    Envelope env;
    env.from = Party::Mt;
    env.to = Party::As;
    env.session_id = session_id;
    env.mt_endpoint = mt_id;
    env.cell_id = cell_id;
    env.payload = encode_message(req);
    return env;
}

inline std::size_t count_tag(const World& w, MessageTag tag, std::size_t from = 0)
{
    std::size_t n = 0;
    const auto& t = w.transport().transcript();
    for (std::size_t i = from; i < t.size(); ++i) {
        if (!t[i].envelope.payload.empty() && t[i].envelope.payload[0] == static_cast<std::uint8_t>(tag)) {
            ++n;
        }
    }
    return n;
}

} // namespace xlayer::testworld
