#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace avatar {

using NodeId = std::int32_t;
using Edge = std::pair<NodeId, NodeId>;

enum class TopologyKind : std::uint8_t { Linear, Cbt, Chord, SkipChord };

std::string_view to_string(TopologyKind kind) noexcept;
TopologyKind parse_topology_kind(std::string_view text);

class TopologyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Identifies one member of a full graph family. `skip` is only meaningful for
/// SkipChord.
struct TopologySpec {
    TopologyKind kind = TopologyKind::Linear;
    NodeId n = 2;
    std::optional<NodeId> skip;

    /// Throws TopologyError when N or the skip factor is out of range for the kind.
    void validate() const;

    friend bool operator==(const TopologySpec&, const TopologySpec&) = default;
};

/// Undirected simple graph over {0..n-1}. Edges are stored with first < second
/// and sorted; adjacency lists are sorted.
struct GuestGraph {
    NodeId n = 0;
    std::vector<Edge> edges;
    std::vector<std::vector<NodeId>> adjacency;

    [[nodiscard]] std::size_t degree(NodeId v) const { return adjacency.at(static_cast<std::size_t>(v)).size(); }
    [[nodiscard]] bool has_edge(NodeId a, NodeId b) const;

    static GuestGraph from_edges(NodeId n, std::vector<Edge> edges);
};

/// Shortest-path tree rooted at node 0.
struct SpanningTree {
    std::vector<NodeId> parent;  // -1 for the root
    std::vector<std::int32_t> depth;
    std::vector<std::vector<NodeId>> children;

    [[nodiscard]] std::int32_t max_depth() const;
    [[nodiscard]] NodeId size() const { return static_cast<NodeId>(parent.size()); }
};

bool is_power_of_two(NodeId n) noexcept;
std::int32_t log2_exact(NodeId n);
std::int32_t ceil_log2(NodeId n) noexcept;

GuestGraph build_topology(const TopologySpec& spec);
SpanningTree spanning_tree(const GuestGraph& g);
std::int32_t diameter(const GuestGraph& g);

/// BFS distances from `source`; -1 marks unreachable nodes.
std::vector<std::int32_t> bfs_distances(const GuestGraph& g, NodeId source);
bool is_connected(const GuestGraph& g);

}  // namespace avatar
