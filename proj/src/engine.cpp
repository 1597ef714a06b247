#include "avatar/engine.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

namespace avatar {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

const HostState& World::state(NodeId host) const {
    if (host < 0 || host >= graph.n || index_of[static_cast<std::size_t>(host)] < 0)
        throw std::out_of_range("not a host: " + std::to_string(host));
    return states[static_cast<std::size_t>(index_of[static_cast<std::size_t>(host)])];
}

HostState& World::state(NodeId host) { return const_cast<HostState&>(std::as_const(*this).state(host)); }

void World::add_edge(NodeId a, NodeId b, EdgeTag tag) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    if (!hosts.contains(a) || !hosts.contains(b)) throw std::invalid_argument("edge endpoint is not a host");
    edges.try_emplace({a, b}, tag);
}

std::vector<Edge> World::edge_list() const {
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const auto& [e, _] : edges) out.push_back(e);
    return out;
}

std::vector<std::vector<NodeId>> World::adjacency() const {
    std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(graph.n));
    for (const auto& [e, _] : edges) {
        adj[static_cast<std::size_t>(e.first)].push_back(e.second);
        adj[static_cast<std::size_t>(e.second)].push_back(e.first);
    }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    return adj;
}

World make_world(const TopologySpec& spec, const HostSet& hosts, std::uint64_t seed, const EngineConfig& config) {
    spec.validate();
    World w;
    w.spec = spec;
    w.graph = build_topology(spec);
    if (hosts.n() != w.graph.n) throw std::invalid_argument("host set built for a different N");
    w.tree = spanning_tree(w.graph);
    w.diameter = diameter(w.graph);
    w.tree_depth = w.tree.max_depth();
    w.hosts = hosts;
    w.target_edges = build_avatar(w.graph, hosts).edge_pairs();
    w.target_ranges = ranges(w.graph.n, hosts);
    w.index_of.assign(static_cast<std::size_t>(w.graph.n), -1);
    const auto ids = hosts.ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        w.index_of[static_cast<std::size_t>(ids[i])] = static_cast<std::int32_t>(i);
        HostState h;
        h.id = ids[i];
        reset(h, w.graph.n, -2);
        w.states.push_back(std::move(h));
        w.rngs.emplace_back(splitmix64(seed ^ (0x5851f42d4c957f2dULL * (static_cast<std::uint64_t>(ids[i]) + 1))));
    }
    w.seed = seed;
    w.rs_bits = config.rs_bits > 0 ? config.rs_bits : 2 * std::max(1, ceil_log2(w.graph.n));
    if (w.rs_bits > 64) throw std::invalid_argument("rs length above 64 bits is not supported");
    const std::uint64_t mask = w.rs_bits == 64 ? ~0ULL : ((1ULL << w.rs_bits) - 1);
    w.beacon = splitmix64(seed ^ 0xa0761d6478bd642fULL) & mask;
    w.constants = config.constants;
    w.limits = watchdog_limits(w.tree_depth);
    return w;
}

StepStats step(World& world) {
    const auto adjacency = world.adjacency();
    const auto nstates = world.states.size();
    std::vector<std::vector<Message>> inbox(nstates);
    for (auto& m : world.inflight) {
        if (m.to_host < 0 || m.to_host >= world.graph.n || world.index_of[static_cast<std::size_t>(m.to_host)] < 0)
            throw InvariantViolation("message addressed to a non-host");
        inbox[static_cast<std::size_t>(world.index_of[static_cast<std::size_t>(m.to_host)])].push_back(std::move(m));
    }
    world.inflight.clear();

    const auto linked = [&](NodeId a, NodeId b) {
        const auto& adj = adjacency[static_cast<std::size_t>(a)];
        return std::binary_search(adj.begin(), adj.end(), b);
    };

    StepStats stats;
    std::vector<HostState> next = world.states;
    std::vector<EdgeOp> ops;
    std::vector<Message> sent;
    for (std::size_t i = 0; i < nstates; ++i) {
        const auto& self = world.states[i];
        std::vector<const HostState*> nbrs;
        for (const auto h : adjacency[static_cast<std::size_t>(self.id)])
            nbrs.push_back(&world.states[static_cast<std::size_t>(world.index_of[static_cast<std::size_t>(h)])]);
        const auto view = make_view(self, std::move(nbrs), adjacency, world.graph, world.tree);
        StepContext ctx{&view, world.round, world.beacon, world.constants, world.limits, &world.rngs[i]};
        auto result = host_step(ctx, inbox[i], next[i]);
        if (result.reset) {
            ++stats.resets;
            stats.faults.emplace_back(self.id, result.fault);
        }
        stats.merges += result.merges_completed;
        for (auto& op : result.edges) ops.push_back(op);
        for (auto& m : result.messages) sent.push_back(std::move(m));
    }

    for (const auto& m : sent) {
        if (m.from_host != m.to_host && !linked(m.from_host, m.to_host))
            throw InvariantViolation("round " + std::to_string(world.round) + ": message " + std::to_string(m.from_host) +
                                     "->" + std::to_string(m.to_host) + " over a missing edge");
    }
    for (const auto& op : ops) {
        if (op.create) continue;
        if (op.actor != op.a && op.actor != op.b)
            throw InvariantViolation("edge deletion by a non-endpoint");
        auto it = world.edges.find({op.a, op.b});
        if (it == world.edges.end()) continue;
        if (op.protocol_only && it->second != EdgeTag::Protocol) continue;
        world.edges.erase(it);
    }
    for (const auto& op : ops) {
        if (!op.create) continue;
        const auto& x = adjacency[static_cast<std::size_t>(op.a)];
        const auto& y = adjacency[static_cast<std::size_t>(op.b)];
        std::vector<NodeId> common;
        std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
        if (common.empty() && !linked(op.a, op.b))
            throw InvariantViolation("round " + std::to_string(world.round) + ": edge (" + std::to_string(op.a) + "," +
                                     std::to_string(op.b) + ") created without an introducer");
        world.edges.try_emplace({op.a, op.b}, EdgeTag::Protocol);
    }

    world.states = std::move(next);
    world.inflight = std::move(sent);
    ++world.round;
    return stats;
}

bool is_legal(const World& world) {
    if (world.edges.size() != world.target_edges.size()) return false;
    std::size_t i = 0;
    for (const auto& [e, _] : world.edges)
        if (e != world.target_edges[i++]) return false;
    const NodeId cluster = world.hosts.front();
    for (const auto& h : world.states) {
        const auto& r = world.target_ranges.range_of(h.id);
        if (static_cast<NodeId>(h.guests.size()) != r.size()) return false;
        NodeId v = r.lo;
        for (const auto& g : h.guests) {
            if (g.vid != v++ || g.cluster != cluster || g.role.tag == RoleTag::Merging) return false;
        }
    }
    return true;
}

bool weakly_connected(const World& world) {
    if (world.states.size() <= 1) return true;
    const auto adj = world.adjacency();
    std::vector<char> seen(static_cast<std::size_t>(world.graph.n), 0);
    std::deque<NodeId> q{world.hosts.front()};
    seen[static_cast<std::size_t>(world.hosts.front())] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
        const auto u = q.front();
        q.pop_front();
        for (const auto v : adj[static_cast<std::size_t>(u)]) {
            if (!seen[static_cast<std::size_t>(v)]) {
                seen[static_cast<std::size_t>(v)] = 1;
                ++count;
                q.push_back(v);
            }
        }
    }
    return count == world.states.size();
}

TraceRecord observe(const World& world, const StepStats& stats) {
    TraceRecord r;
    r.round = world.round;
    std::set<NodeId> clusters;
    std::int64_t bytes = 0;
    for (const auto& h : world.states) {
        bytes += 16;
        for (const auto& g : h.guests) {
            clusters.insert(g.cluster);
            bytes += 48 + 4 * static_cast<std::int64_t>(g.adopted.size() + g.child_hosts.size() + 2 * g.pending_links.size());
            if (g.members) bytes += 4 * static_cast<std::int64_t>(g.members->size());
            if (g.merged_hosts) bytes += 4 * static_cast<std::int64_t>(g.merged_hosts->size());
        }
    }
    r.cluster_count = static_cast<std::int32_t>(clusters.size());
    std::vector<std::int32_t> deg(static_cast<std::size_t>(world.graph.n), 0);
    for (const auto& [e, _] : world.edges) {
        ++deg[static_cast<std::size_t>(e.first)];
        ++deg[static_cast<std::size_t>(e.second)];
    }
    r.max_host_degree = *std::max_element(deg.begin(), deg.end());
    r.weakly_connected = weakly_connected(world);
    r.legal = is_legal(world);
    r.resets_this_round = stats.resets;
    r.merges_completed = stats.merges;
    r.digest_bytes = bytes;
    return r;
}

std::int64_t default_round_budget(const World& world) {
    return 50LL * world.diameter * std::max(1, ceil_log2(world.graph.n));
}

RunResult run(World world, const RunOptions& options) {
    if (options.max_rounds < 1) throw std::invalid_argument("max_rounds must be at least 1");
    RunResult out;
    out.closure_window = options.closure_window >= 0 ? options.closure_window : 10LL * world.diameter;
    out.trace.push_back(observe(world, {}));
    std::int64_t streak = out.trace.back().legal ? 1 : 0;
    while (streak <= out.closure_window) {
        if (streak == 0 && world.round >= options.max_rounds) break;
        const auto stats = step(world);
        out.trace.push_back(observe(world, stats));
        streak = out.trace.back().legal ? streak + 1 : 0;
    }
    out.converged = streak > out.closure_window;
    out.disconnected = std::any_of(out.trace.begin(), out.trace.end(), [](const TraceRecord& r) { return !r.weakly_connected; });
    out.metrics = run_metrics(out.trace, out.converged);
    out.final_world = std::move(world);
    return out;
}

}  // namespace avatar
