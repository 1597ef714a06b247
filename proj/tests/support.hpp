#pragma once

#include "avatar/adversary.hpp"
#include "avatar/engine.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

namespace avatar::test {

inline HostSet all_hosts(NodeId n) {
    std::vector<NodeId> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return {v, n};
}

/// Owns the adjacency so the returned view stays valid.
struct ViewHolder {
    std::vector<std::vector<NodeId>> adjacency;
    LocalView view;

    ViewHolder(const World& w, NodeId host) : adjacency(w.adjacency()) {
        std::vector<const HostState*> nbrs;
        for (const auto h : adjacency[static_cast<std::size_t>(host)]) nbrs.push_back(&w.state(h));
        view = make_view(w.state(host), std::move(nbrs), adjacency, w.graph, w.tree);
    }
};

inline bool vids_conserved(const World& w) {
    std::vector<int> seen(static_cast<std::size_t>(w.graph.n), 0);
    for (const auto& h : w.states)
        for (const auto& g : h.guests) {
            if (g.vid < 0 || g.vid >= w.graph.n) return false;
            ++seen[static_cast<std::size_t>(g.vid)];
        }
    return std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
}

/// Each cluster is a full guest instance: outside merges, the hosts sharing a
/// cluster id hold every vid exactly once between them.
inline bool clusters_conserved(const World& w) {
    std::map<NodeId, std::vector<int>> seen;
    for (const auto& h : w.states) {
        if (h.any_merging()) return true;
        auto& s = seen.try_emplace(h.cluster(), static_cast<std::size_t>(w.graph.n), 0).first->second;
        for (const auto& g : h.guests) ++s[static_cast<std::size_t>(g.vid)];
    }
    for (const auto& [_, s] : seen)
        if (!std::all_of(s.begin(), s.end(), [](int c) { return c == 1; })) return false;
    return true;
}

}  // namespace avatar::test
