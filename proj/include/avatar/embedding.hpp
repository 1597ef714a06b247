#pragma once

#include "avatar/topology.hpp"

#include <span>
#include <vector>

namespace avatar {

class EmbeddingError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sorted, distinct real-node ids, all below N.
class HostSet {
public:
    HostSet() = default;
    /// Sorts and deduplicates; throws EmbeddingError on an empty set or an id outside [0, n).
    HostSet(std::vector<NodeId> ids, NodeId n);

    [[nodiscard]] std::span<const NodeId> ids() const noexcept { return ids_; }
    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] NodeId n() const noexcept { return n_; }
    [[nodiscard]] bool contains(NodeId id) const;
    [[nodiscard]] NodeId front() const { return ids_.front(); }

    friend bool operator==(const HostSet&, const HostSet&) = default;

private:
    std::vector<NodeId> ids_;
    NodeId n_ = 0;
};

struct Range {
    NodeId host = 0;
    NodeId lo = 0;  // inclusive
    NodeId hi = 0;  // exclusive

    [[nodiscard]] bool contains(NodeId v) const noexcept { return v >= lo && v < hi; }
    [[nodiscard]] NodeId size() const noexcept { return hi - lo; }
    friend bool operator==(const Range&, const Range&) = default;
};

/// Half-open ranges, one per host, in host order; they partition [0, N).
struct RangeMap {
    NodeId n = 0;
    std::vector<Range> ranges;

    [[nodiscard]] const Range& range_of(NodeId host) const;
};

RangeMap ranges(NodeId n, const HostSet& v);
NodeId host_of(const RangeMap& r, NodeId virtual_id);

struct HostEdge {
    NodeId a = 0;  // a < b
    NodeId b = 0;
    bool type1 = false;
    bool type2 = false;

    friend bool operator==(const HostEdge&, const HostEdge&) = default;
};

struct HostGraph {
    HostSet hosts;
    std::vector<HostEdge> edges;  // sorted by (a, b)

    [[nodiscard]] std::vector<Edge> edge_pairs() const;
    [[nodiscard]] std::size_t degree(NodeId host) const;
    [[nodiscard]] std::size_t max_degree() const;
};

HostGraph build_avatar(const GuestGraph& g, const HostSet& v);

/// Normalizes pairs (first < second), sorts and deduplicates.
std::vector<Edge> normalize_edges(std::vector<Edge> edges);

/// True iff `observed` is exactly the edge set of build_avatar(g, v).
bool is_legal_embedding(std::span<const Edge> observed, const GuestGraph& g, const HostSet& v);

}  // namespace avatar
