#pragma once

#include "avatar/embedding.hpp"
#include "avatar/topology.hpp"
#include "avatar/trace.hpp"

#include <optional>
#include <span>

namespace avatar {

/// Largest N for which every host set is enumerated.
inline constexpr NodeId kBruteForceMaxN = 16;

struct TopologyMetrics {
    std::int32_t diameter = 0;
    std::int32_t tree_depth = 0;
    // Maximum degree of embedding. `exact` is set when the brute-force
    // enumerator ran; the bounds are always filled.
    std::optional<std::int32_t> delta_exact;
    std::int32_t delta_lower = 0;
    std::int32_t delta_upper = 0;

    [[nodiscard]] std::int32_t delta_estimate() const { return delta_exact.value_or(delta_lower); }
};

struct RunMetrics {
    std::optional<std::int64_t> convergence_rounds;  // nullopt = did not converge
    double degree_expansion = 0.0;
    std::int32_t peak_degree = 0;
    std::int32_t initial_degree = 0;
    std::int32_t final_degree = 0;
};

/// Number of guest edges with exactly one endpoint in [lo, hi).
std::int32_t external_edge_count(const GuestGraph& g, NodeId lo, NodeId hi);

/// Exact max host degree of build_avatar(g, V) over every non-empty V.
/// Throws std::invalid_argument when g.n > kBruteForceMaxN.
std::int32_t max_degree_embedding_bruteforce(const GuestGraph& g);

/// Degree of the host owning [lo, hi) when every id outside the range is its
/// own host. Maximizing this over all contiguous ranges gives a lower bound
/// on the maximum degree of embedding (attained by a concrete host set).
std::int32_t isolated_range_degree(const GuestGraph& g, NodeId lo, NodeId hi);

struct DeltaBounds {
    std::int32_t lower = 0;
    std::int32_t upper = 0;
};

/// Lower bound from isolated ranges, upper bound from external edge counts
/// plus the two line edges, both scanned over all O(N^2) contiguous ranges.
DeltaBounds max_degree_embedding_bounds(const GuestGraph& g);

TopologyMetrics topology_metrics(const GuestGraph& g, bool exact_delta);

/// Peak over rounds [0, converged_at] divided by max(initial, final) degree.
double degree_expansion(std::span<const TraceRecord> trace, std::int64_t converged_at);
double degree_expansion(std::span<const std::int32_t> max_degrees, std::size_t converged_at);

/// First round of the legal suffix, or nullopt when the last record is not legal.
std::optional<std::int64_t> convergence_round(std::span<const TraceRecord> trace);
std::optional<std::size_t> convergence_round(std::span<const bool> legal);

RunMetrics run_metrics(std::span<const TraceRecord> trace, bool converged);

}  // namespace avatar
