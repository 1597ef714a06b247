#include "avatar/adversary.hpp"

#include <algorithm>
#include <numeric>

namespace avatar {

namespace {

constexpr std::string_view kNames[] = {"singleton-line", "converged", "chord-worst-range", "forged-merge-rs",
                                       "all-long-followers", "random"};

void plant_path(World& w) {
    const auto ids = w.hosts.ids();
    for (std::size_t i = 0; i + 1 < ids.size(); ++i) w.add_edge(ids[i], ids[i + 1]);
}

std::vector<NodeId> child_hosts_in(const World& w, const RangeMap& rm, NodeId vid) {
    std::vector<NodeId> out;
    for (const auto c : w.tree.children[static_cast<std::size_t>(vid)]) out.push_back(host_of(rm, c));
    return out;
}

/// Marks every node of the proper cluster `members` as prepared for a merge
/// with `partner`; the root is ready to resolve and publishes `published`.
void plant_merging(World& w, const std::vector<NodeId>& members, NodeId partner, std::uint64_t rs,
                   const std::vector<NodeId>& published) {
    const HostSet hs(members, w.graph.n);
    const auto rm = ranges(w.graph.n, hs);
    for (const auto h : members) {
        for (auto& g : w.state(h).guests) {
            g.role = {RoleTag::Merging, {}};
            g.partner = partner;
            g.stage = MergeStage::Prepared;
            g.rs = rs;
            g.child_hosts = child_hosts_in(w, rm, g.vid);
            if (g.vid == 0) {
                g.stage = MergeStage::Resolving;
                g.counterpart_host = partner;
                g.members = make_host_list(published);
                g.phase = RootPhase::MergeAwait;
            }
        }
    }
}

std::vector<NodeId> random_subset(std::mt19937_64& rng, const HostSet& hosts) {
    std::vector<NodeId> out;
    for (const auto h : hosts.ids())
        if (rng() & 1u) out.push_back(h);
    if (out.empty()) out.push_back(hosts.ids()[rng() % hosts.size()]);
    return out;
}

}  // namespace

std::vector<std::string> scenario_names() { return {std::begin(kNames), std::end(kNames)}; }

void plant_cluster(World& w, const std::vector<NodeId>& members, std::optional<std::uint64_t> rs) {
    const HostSet hs(members, w.graph.n);
    const auto rm = ranges(w.graph.n, hs);
    const auto ids = hs.ids();
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto& h = w.state(ids[i]);
        h.cluster_pred = i == 0 ? kNone : ids[i - 1];
        h.cluster_succ = i + 1 < ids.size() ? ids[i + 1] : kNone;
        h.guests.clear();
        const auto& r = rm.range_of(ids[i]);
        for (NodeId v = r.lo; v < r.hi; ++v) {
            auto g = clean_guest(v, ids[i]);
            g.cluster = ids.front();
            g.rs = rs;
            h.guests.push_back(std::move(g));
        }
    }
    for (const auto& e : build_avatar(w.graph, hs).edges) w.add_edge(e.a, e.b);
}

HostSet scenario_hosts(std::string_view name, const TopologySpec& spec, const HostSet& requested) {
    const NodeId n = spec.n;
    if (name == "chord-worst-range") {
        std::vector<NodeId> v{0};
        for (NodeId x = n / 2; x < n; ++x) v.push_back(x);
        return {v, n};
    }
    if (name == "forged-merge-rs") {
        std::vector<NodeId> v(static_cast<std::size_t>(n));
        std::iota(v.begin(), v.end(), 0);
        return {v, n};
    }
    return requested;
}

World gen_random(const TopologySpec& spec, const HostSet& hosts, std::uint64_t seed, double level,
                 const EngineConfig& config) {
    if (level < 0.0 || level > 1.0) throw std::invalid_argument("corruption level must lie in [0, 1]");
    World w = make_world(spec, hosts, seed, config);
    std::mt19937_64 rng(splitmix64(seed ^ 0x2545f4914f6cdd1dULL));
    const auto coin = [&](double p) { return std::generate_canonical<double, 53>(rng) < p; };
    const auto pick = [&](std::size_t k) { return static_cast<std::size_t>(rng() % k); };
    const NodeId n = w.graph.n;
    const auto ids = hosts.ids();

    std::vector<NodeId> order(ids.begin(), ids.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 1; i < order.size(); ++i) w.add_edge(order[i], order[pick(i)]);
    if (order.size() > 2) {
        for (std::size_t e = 0; e < order.size() / 2; ++e) {
            const auto a = order[pick(order.size())];
            const auto b = order[pick(order.size())];
            if (a != b) w.add_edge(a, b);
        }
    }

    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i = 0; i < order.size();) {
        if (coin(level) && i + 1 < order.size()) {
            const auto size = std::min<std::size_t>(2 + pick(3), order.size() - i);
            plant_cluster(w, {order.begin() + static_cast<std::ptrdiff_t>(i), order.begin() + static_cast<std::ptrdiff_t>(i + size)},
                          std::nullopt);
            i += size;
        } else {
            ++i;
        }
    }

    const std::uint64_t mask = w.rs_bits == 64 ? ~0ULL : ((1ULL << w.rs_bits) - 1);
    const auto any_host = [&] { return ids[pick(ids.size())]; };
    const auto maybe_host = [&] { return coin(0.25) ? kNone : any_host(); };
    for (auto& h : w.states) {
        if (coin(level)) h.cluster_succ = maybe_host();
        if (coin(level)) h.cluster_pred = maybe_host();
        for (auto& g : h.guests) {
            if (coin(level)) g.cluster = any_host();
            if (coin(level)) {
                g.pfc.tag = static_cast<PfcTag>(pick(3));
                g.pfc.payload = {};
                if (g.pfc.tag != PfcTag::Clean) g.pfc.payload.kind = static_cast<WaveKind>(1 + pick(8));
                g.pfc.payload.target = maybe_host();
                g.pfc.payload.leader = {any_host(), static_cast<NodeId>(pick(static_cast<std::size_t>(n))), any_host()};
                if (coin(0.5)) g.pfc.payload.hosts = make_host_list(random_subset(rng, hosts));
                if (coin(0.5)) g.pfc.payload.members = make_host_list(random_subset(rng, hosts));
            }
            if (coin(level)) {
                g.role.tag = static_cast<RoleTag>(pick(8));
                g.role.leader = {any_host(), static_cast<NodeId>(pick(static_cast<std::size_t>(n))), any_host()};
            }
            if (coin(level)) g.poll_cnt = static_cast<std::int32_t>(pick(13));
            if (coin(level)) g.partner = maybe_host();
            if (coin(level)) g.rs = rng() & mask;
            if (coin(level)) {
                g.stage = static_cast<MergeStage>(pick(5));
                g.counterpart_host = any_host();
                g.merged_hosts = make_host_list(random_subset(rng, hosts));
                g.child_hosts.clear();
                for (std::size_t c = 0; c < w.tree.children[static_cast<std::size_t>(g.vid)].size(); ++c)
                    g.child_hosts.push_back(any_host());
            }
            if (coin(level)) {
                g.phase = static_cast<RootPhase>(pick(12));
                g.phase_age = static_cast<std::int32_t>(pick(static_cast<std::size_t>(w.limits.wave) + 1));
                g.wave_started = coin(0.5);
                g.members = make_host_list(random_subset(rng, hosts));
            }
            if (coin(level)) g.adopted = {{any_host()}};
        }
    }
    if (!weakly_connected(w)) throw std::logic_error("gen_random produced a disconnected graph");
    return w;
}

World gen_scenario(std::string_view name, const TopologySpec& spec, const HostSet& requested, std::uint64_t seed,
                   const ScenarioOptions& options) {
    if (std::find(std::begin(kNames), std::end(kNames), name) == std::end(kNames))
        throw ScenarioError("unknown scenario: " + std::string(name));
    if (name == "random") return gen_random(spec, requested, seed, options.corruption, options.engine);

    spec.validate();
    const auto hosts = scenario_hosts(name, spec, requested);
    World w = make_world(spec, hosts, seed, options.engine);
    const NodeId n = w.graph.n;
    const auto ids = hosts.ids();
    const std::vector<NodeId> all(ids.begin(), ids.end());

    if (name == "singleton-line") {
        plant_path(w);
    } else if (name == "converged") {
        plant_cluster(w, all, w.beacon);
    } else if (name == "all-long-followers") {
        plant_path(w);
        for (auto& h : w.states) {
            for (auto& g : h.guests) {
                g.role = {RoleTag::LongFollower, {}};
                g.rs = w.beacon;
            }
            auto& root = h.guests.front();
            root.phase = RootPhase::FollowPoll;
            root.poll_cnt = w.constants.long_polls;
            root.long_follower = true;
        }
    } else if (name == "chord-worst-range") {
        if (n < 4) throw std::invalid_argument("chord-worst-range needs N >= 4");
        const std::vector<NodeId> big(ids.begin() + 1, ids.end());
        plant_cluster(w, {0}, w.beacon);
        plant_cluster(w, big, w.beacon);
        w.add_edge(0, n / 2);
        plant_merging(w, {0}, n / 2, w.beacon, {0});
        plant_merging(w, big, 0, w.beacon, big);
    } else if (name == "forged-merge-rs") {
        plant_path(w);
        std::mt19937_64 rng(splitmix64(seed ^ 0x9fb21c651e98df25ULL));
        const std::uint64_t mask = w.rs_bits == 64 ? ~0ULL : ((1ULL << w.rs_bits) - 1);
        for (NodeId a = 0; a + 1 < n; a += 2) {
            const NodeId b = a + 1;
            const std::uint64_t guess = rng() & mask;
            // Each side publishes the partner's outer path neighbour as a member.
            std::vector<NodeId> list_a{a};
            std::vector<NodeId> list_b{b};
            if (b + 1 < n) list_a.push_back(b + 1);
            if (a > 0) list_b.push_back(a - 1);
            plant_merging(w, {a}, b, guess, list_a);
            plant_merging(w, {b}, a, guess, list_b);
        }
    }
    if (!weakly_connected(w)) throw std::invalid_argument("initial host graph is disconnected");
    return w;
}

World init_world(const TopologySpec& spec, const HostSet& hosts, std::string_view scenario, std::uint64_t seed,
                 const ScenarioOptions& options) {
    return gen_scenario(scenario, spec, hosts, seed, options);
}

}  // namespace avatar
