#include "avatar/embedding.hpp"

#include <algorithm>
#include <map>

namespace avatar {

HostSet::HostSet(std::vector<NodeId> ids, NodeId n) : ids_(std::move(ids)), n_(n) {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    if (ids_.empty()) throw EmbeddingError("host set is empty");
    if (ids_.front() < 0 || ids_.back() >= n)
        throw EmbeddingError("host id outside [0, " + std::to_string(n) + ")");
}

bool HostSet::contains(NodeId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

const Range& RangeMap::range_of(NodeId host) const {
    auto it = std::lower_bound(ranges.begin(), ranges.end(), host, [](const Range& r, NodeId h) { return r.host < h; });
    if (it == ranges.end() || it->host != host) throw EmbeddingError("no range for host " + std::to_string(host));
    return *it;
}

RangeMap ranges(NodeId n, const HostSet& v) {
    if (v.size() == 0) throw EmbeddingError("host set is empty");
    if (v.n() != n) throw EmbeddingError("host set built for a different N");
    RangeMap out;
    out.n = n;
    const auto ids = v.ids();
    out.ranges.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const NodeId lo = i == 0 ? 0 : ids[i];
        const NodeId hi = i + 1 < ids.size() ? ids[i + 1] : n;
        out.ranges.push_back({ids[i], lo, hi});
    }
    return out;
}

NodeId host_of(const RangeMap& r, NodeId virtual_id) {
    if (virtual_id < 0 || virtual_id >= r.n) throw EmbeddingError("virtual id out of range");
    auto it = std::upper_bound(r.ranges.begin(), r.ranges.end(), virtual_id,
                               [](NodeId x, const Range& range) { return x < range.lo; });
    return std::prev(it)->host;
}

std::vector<Edge> HostGraph::edge_pairs() const {
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const auto& e : edges) out.emplace_back(e.a, e.b);
    return out;
}

std::size_t HostGraph::degree(NodeId host) const {
    return static_cast<std::size_t>(
        std::count_if(edges.begin(), edges.end(), [host](const HostEdge& e) { return e.a == host || e.b == host; }));
}

std::size_t HostGraph::max_degree() const {
    std::map<NodeId, std::size_t> deg;
    for (const auto& e : edges) {
        ++deg[e.a];
        ++deg[e.b];
    }
    std::size_t best = 0;
    for (const auto& [_, d] : deg) best = std::max(best, d);
    return best;
}

HostGraph build_avatar(const GuestGraph& g, const HostSet& v) {
    if (v.n() != g.n) throw EmbeddingError("host set built for N=" + std::to_string(v.n()) + " but graph has N=" + std::to_string(g.n));
    const auto rm = ranges(g.n, v);
    std::vector<NodeId> owner(static_cast<std::size_t>(g.n));
    for (const auto& r : rm.ranges)
        for (NodeId x = r.lo; x < r.hi; ++x) owner[static_cast<std::size_t>(x)] = r.host;

    std::map<Edge, HostEdge> merged;
    const auto ids = v.ids();
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) {
        auto& e = merged[{ids[i], ids[i + 1]}];
        e.a = ids[i];
        e.b = ids[i + 1];
        e.type1 = true;
    }
    for (const auto& [x, y] : g.edges) {
        NodeId a = owner[static_cast<std::size_t>(x)];
        NodeId b = owner[static_cast<std::size_t>(y)];
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        auto& e = merged[{a, b}];
        e.a = a;
        e.b = b;
        e.type2 = true;
    }
    HostGraph out;
    out.hosts = v;
    out.edges.reserve(merged.size());
    for (const auto& [_, e] : merged) out.edges.push_back(e);
    return out;
}

std::vector<Edge> normalize_edges(std::vector<Edge> edges) {
    for (auto& [a, b] : edges)
        if (a > b) std::swap(a, b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    return edges;
}

bool is_legal_embedding(std::span<const Edge> observed, const GuestGraph& g, const HostSet& v) {
    const auto expected = build_avatar(g, v).edge_pairs();
    const auto seen = normalize_edges({observed.begin(), observed.end()});
    return seen == expected;
}

}  // namespace avatar
