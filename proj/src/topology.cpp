#include "avatar/topology.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>

namespace avatar {

std::string_view to_string(TopologyKind kind) noexcept {
    switch (kind) {
        case TopologyKind::Linear: return "linear";
        case TopologyKind::Cbt: return "cbt";
        case TopologyKind::Chord: return "chord";
        case TopologyKind::SkipChord: return "skipchord";
    }
    return "?";
}

TopologyKind parse_topology_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "linear") return TopologyKind::Linear;
    if (lower == "cbt") return TopologyKind::Cbt;
    if (lower == "chord") return TopologyKind::Chord;
    if (lower == "skipchord") return TopologyKind::SkipChord;
    throw TopologyError("unknown topology kind: " + std::string(text));
}

bool is_power_of_two(NodeId n) noexcept { return n > 0 && std::has_single_bit(static_cast<std::uint32_t>(n)); }

std::int32_t log2_exact(NodeId n) {
    if (!is_power_of_two(n)) throw TopologyError("N must be a power of two, got " + std::to_string(n));
    return std::countr_zero(static_cast<std::uint32_t>(n));
}

std::int32_t ceil_log2(NodeId n) noexcept {
    if (n <= 1) return 0;
    return static_cast<std::int32_t>(std::bit_width(static_cast<std::uint32_t>(n - 1)));
}

void TopologySpec::validate() const {
    if (n < 2) throw TopologyError("N must be at least 2");
    const bool ring_family = kind == TopologyKind::Chord || kind == TopologyKind::SkipChord;
    if (ring_family && !is_power_of_two(n)) throw TopologyError("Chord/SkipChord need a power-of-two N");
    if (kind == TopologyKind::SkipChord) {
        if (!skip) throw TopologyError("SkipChord needs a skip factor");
        // Rounded up so that s = log2 N stays admissible at N = 8.
        const NodeId lg = log2_exact(n);
        const NodeId bound = (n + lg - 1) / lg;
        if (*skip < 1 || *skip > bound)
            throw TopologyError("skip factor must lie in [1, " + std::to_string(bound) + "]");
    } else if (skip) {
        throw TopologyError("skip factor only applies to SkipChord");
    }
}

bool GuestGraph::has_edge(NodeId a, NodeId b) const {
    const auto& adj = adjacency.at(static_cast<std::size_t>(a));
    return std::binary_search(adj.begin(), adj.end(), b);
}

GuestGraph GuestGraph::from_edges(NodeId n, std::vector<Edge> edges) {
    GuestGraph g;
    g.n = n;
    for (auto& [a, b] : edges) {
        if (a == b) throw TopologyError("self-loop in guest graph");
        if (a < 0 || b < 0 || a >= n || b >= n) throw TopologyError("edge endpoint out of range");
        if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    g.adjacency.assign(static_cast<std::size_t>(n), {});
    for (const auto& [a, b] : g.edges) {
        g.adjacency[static_cast<std::size_t>(a)].push_back(b);
        g.adjacency[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& adj : g.adjacency) std::sort(adj.begin(), adj.end());
    return g;
}

namespace {

void cbt_edges(NodeId lo, NodeId hi, NodeId parent, std::vector<Edge>& out) {
    if (lo > hi) return;
    const NodeId root = (lo + hi) / 2;
    if (parent >= 0) out.emplace_back(parent, root);
    cbt_edges(lo, root - 1, root, out);
    cbt_edges(root + 1, hi, root, out);
}

}  // namespace

GuestGraph build_topology(const TopologySpec& spec) {
    spec.validate();
    const NodeId n = spec.n;
    std::vector<Edge> edges;
    switch (spec.kind) {
        case TopologyKind::Linear:
            for (NodeId i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
            break;
        case TopologyKind::Cbt:
            cbt_edges(0, n - 1, -1, edges);
            break;
        case TopologyKind::Chord: {
            // Fingers up to size N/2 (k < log N).
            const auto logn = log2_exact(n);
            for (NodeId i = 0; i < n; ++i)
                for (std::int32_t k = 0; k < logn; ++k) edges.emplace_back(i, (i + (NodeId{1} << k)) % n);
            break;
        }
        case TopologyKind::SkipChord: {
            const auto logn = log2_exact(n);
            const NodeId s = *spec.skip;
            for (NodeId i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
            const NodeId last_k = (n - s) / s;
            for (NodeId k = 0; k <= last_k; ++k) {
                const NodeId j = s * k;
                edges.emplace_back(j, (j + (NodeId{1} << (k % logn))) % n);
            }
            break;
        }
    }
    // N == 2 ring/chord edges can produce (0,1) twice; from_edges collapses duplicates.
    return GuestGraph::from_edges(n, std::move(edges));
}

std::vector<std::int32_t> bfs_distances(const GuestGraph& g, NodeId source) {
    std::vector<std::int32_t> dist(static_cast<std::size_t>(g.n), -1);
    std::deque<NodeId> queue{source};
    dist[static_cast<std::size_t>(source)] = 0;
    while (!queue.empty()) {
        const NodeId v = queue.front();
        queue.pop_front();
        for (NodeId w : g.adjacency[static_cast<std::size_t>(v)]) {
            auto& d = dist[static_cast<std::size_t>(w)];
            if (d < 0) {
                d = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

bool is_connected(const GuestGraph& g) {
    if (g.n == 0) return true;
    const auto dist = bfs_distances(g, 0);
    return std::none_of(dist.begin(), dist.end(), [](std::int32_t d) { return d < 0; });
}

std::int32_t SpanningTree::max_depth() const {
    return depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end());
}

SpanningTree spanning_tree(const GuestGraph& g) {
    const auto dist = bfs_distances(g, 0);
    SpanningTree tree;
    tree.parent.assign(static_cast<std::size_t>(g.n), -1);
    tree.depth = dist;
    tree.children.assign(static_cast<std::size_t>(g.n), {});
    for (NodeId v = 1; v < g.n; ++v) {
        const auto dv = dist[static_cast<std::size_t>(v)];
        if (dv < 0) throw TopologyError("spanning_tree: guest graph is disconnected");
        // Adjacency is sorted, so the first neighbour one level up is the smallest id.
        for (NodeId w : g.adjacency[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(w)] == dv - 1) {
                tree.parent[static_cast<std::size_t>(v)] = w;
                tree.children[static_cast<std::size_t>(w)].push_back(v);
                break;
            }
        }
    }
    return tree;
}

std::int32_t diameter(const GuestGraph& g) {
    std::int32_t best = 0;
    for (NodeId v = 0; v < g.n; ++v) {
        const auto dist = bfs_distances(g, v);
        for (auto d : dist) {
            if (d < 0) throw TopologyError("diameter: guest graph is disconnected");
            best = std::max(best, d);
        }
    }
    return best;
}

}  // namespace avatar
