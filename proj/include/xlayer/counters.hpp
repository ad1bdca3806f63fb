#pragma once

#include <cstdint>

namespace xlayer {

struct CostCounters {
    std::uint64_t cipher_block_ops = 0;
    std::uint64_t prf_calls = 0;
    std::uint64_t knn_distance_evals = 0;
    std::uint64_t messages_sent = 0;
    std::uint64_t bytes_sent = 0;
    std::uint64_t wall_ns = 0;

    CostCounters& operator+=(const CostCounters& other);
    friend CostCounters operator+(CostCounters a, const CostCounters& b) { return a += b; }
    friend bool operator==(const CostCounters&, const CostCounters&) = default;

    // Sum of the deterministic operation counters (bytes and wall time excluded).
    std::uint64_t total_ops() const;
};

/// Installs a counter sink for the current thread for the lifetime of the
/// scope. Nested scopes forward their totals to the enclosing scope on exit.
class CounterScope {
public:
    CounterScope();
    ~CounterScope();
    CounterScope(const CounterScope&) = delete;
    CounterScope& operator=(const CounterScope&) = delete;

    const CostCounters& counters() const { return counters_; }

private:
    CostCounters counters_;
    CounterScope* parent_;
};

namespace count {
void cipher_blocks(std::uint64_t n);
void prf_call();
void knn_evals(std::uint64_t n);
void message(std::uint64_t bytes);
} // namespace count

} // namespace xlayer
