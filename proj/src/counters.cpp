#include "xlayer/counters.hpp"

namespace xlayer {

namespace {
thread_local CounterScope* g_active = nullptr;
thread_local CostCounters* g_sink = nullptr;
} // namespace

CostCounters& CostCounters::operator+=(const CostCounters& other)
{
    cipher_block_ops += other.cipher_block_ops;
    prf_calls += other.prf_calls;
    knn_distance_evals += other.knn_distance_evals;
    messages_sent += other.messages_sent;
    bytes_sent += other.bytes_sent;
    wall_ns += other.wall_ns;
    return *this;
}

std::uint64_t CostCounters::total_ops() const
{
    return cipher_block_ops + prf_calls + knn_distance_evals + messages_sent;
}

CounterScope::CounterScope()
    : parent_(g_active)
{
    g_active = this;
    g_sink = &counters_;
}

CounterScope::~CounterScope()
{
    g_active = parent_;
    g_sink = parent_ != nullptr ? &parent_->counters_ : nullptr;
    if (parent_ != nullptr) {
        parent_->counters_ += counters_;
    }
}

namespace count {

void cipher_blocks(std::uint64_t n)
{
    if (g_sink != nullptr) {
        g_sink->cipher_block_ops += n;
    }
}

void prf_call()
{
    if (g_sink != nullptr) {
        ++g_sink->prf_calls;
    }
}

void knn_evals(std::uint64_t n)
{
    if (g_sink != nullptr) {
        g_sink->knn_distance_evals += n;
    }
}

void message(std::uint64_t bytes)
{
    if (g_sink != nullptr) {
        ++g_sink->messages_sent;
        g_sink->bytes_sent += bytes;
    }
}

} // namespace count

} // namespace xlayer
