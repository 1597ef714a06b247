#pragma once

#include <cstdint>

namespace avatar {

/// One per-round observation of a running World.
struct TraceRecord {
    std::int64_t round = 0;
    std::int32_t cluster_count = 1;
    std::int32_t max_host_degree = 0;
    bool weakly_connected = true;
    bool legal = false;
    std::int32_t resets_this_round = 0;
    std::int32_t merges_completed = 0;
    std::int64_t digest_bytes = 0;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

}  // namespace avatar
