#include "avatar/protocol.hpp"

#include <algorithm>

namespace avatar {

HostList make_host_list(std::vector<NodeId> ids) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return std::make_shared<const std::vector<NodeId>>(std::move(ids));
}

namespace {

bool same_list(const HostList& a, const HostList& b) {
    if (!a || !b) return !a && !b;
    return a == b || *a == *b;
}

}  // namespace

std::string_view to_string(WaveKind kind) noexcept {
    switch (kind) {
        case WaveKind::None: return "none";
        case WaveKind::LeadInform: return "lead-inform";
        case WaveKind::Close: return "close";
        case WaveKind::ConnectFollowers: return "connect-followers";
        case WaveKind::FollowerInform: return "follower-inform";
        case WaveKind::Poll: return "poll";
        case WaveKind::FollowLeader: return "follow-leader";
        case WaveKind::Prep: return "prep";
        case WaveKind::Settle: return "settle";
    }
    return "?";
}

std::string_view to_string(RoleTag tag) noexcept {
    switch (tag) {
        case RoleTag::Undecided: return "undecided";
        case RoleTag::OpenLeader: return "open-leader";
        case RoleTag::ClosedLeader: return "closed-leader";
        case RoleTag::ShortFollower: return "short-follower";
        case RoleTag::LongFollower: return "long-follower";
        case RoleTag::PotentialFollower: return "potential-follower";
        case RoleTag::Follower: return "follower";
        case RoleTag::Merging: return "merging";
    }
    return "?";
}

std::string_view to_string(RootPhase phase) noexcept {
    switch (phase) {
        case RootPhase::Idle: return "idle";
        case RootPhase::LeadInform: return "lead-inform";
        case RootPhase::LeadClose: return "lead-close";
        case RootPhase::LeadConnect: return "lead-connect";
        case RootPhase::FollowInform: return "follow-inform";
        case RootPhase::FollowPoll: return "follow-poll";
        case RootPhase::FollowAnnounce: return "follow-announce";
        case RootPhase::FollowAwait: return "follow-await";
        case RootPhase::MergePrep: return "merge-prep";
        case RootPhase::MergeAwait: return "merge-await";
        case RootPhase::MergeResolve: return "merge-resolve";
        case RootPhase::MergeSettle: return "merge-settle";
    }
    return "?";
}

std::string_view to_string(FaultReason reason) noexcept {
    switch (reason) {
        case FaultReason::None: return "none";
        case FaultReason::EmptyHost: return "empty-host";
        case FaultReason::MixedPhases: return "mixed-phases";
        case FaultReason::RangeMismatch: return "range-mismatch";
        case FaultReason::PointerMismatch: return "pointer-mismatch";
        case FaultReason::ExtraEdge: return "extra-edge";
        case FaultReason::ClusterId: return "cluster-id";
        case FaultReason::TreeNeighbour: return "tree-neighbour";
        case FaultReason::GuestNeighbour: return "guest-neighbour";
        case FaultReason::PfcState: return "pfc-state";
        case FaultReason::MergeState: return "merge-state";
        case FaultReason::RoleState: return "role-state";
        case FaultReason::RootWatchdog: return "root-watchdog";
        case FaultReason::MergeWatchdog: return "merge-watchdog";
        case FaultReason::PollCount: return "poll-count";
        case FaultReason::MergeGuard: return "merge-guard";
    }
    return "?";
}

bool operator==(const WavePayload& a, const WavePayload& b) {
    return a.kind == b.kind && a.target == b.target && a.leader == b.leader && a.long_follower == b.long_follower &&
           a.rs == b.rs && same_list(a.hosts, b.hosts) && a.candidate == b.candidate && a.relayed == b.relayed && same_list(a.members, b.members);
}

bool operator==(const GuestNodeState& a, const GuestNodeState& b) {
    return a.vid == b.vid && a.host == b.host && a.cluster == b.cluster && a.pfc == b.pfc && a.role == b.role &&
           a.poll_cnt == b.poll_cnt && a.partner == b.partner && a.rs == b.rs && a.adopted == b.adopted &&
           a.stage == b.stage && a.counterpart_host == b.counterpart_host && same_list(a.merged_hosts, b.merged_hosts) &&
           a.merge_age == b.merge_age && a.child_hosts == b.child_hosts && a.pending_links == b.pending_links &&
           a.phase == b.phase && a.phase_age == b.phase_age && a.wave_started == b.wave_started &&
           a.long_follower == b.long_follower && a.chosen_leader == b.chosen_leader &&
           same_list(a.members, b.members) && a.pfc_bad_rounds == b.pfc_bad_rounds;
}

bool operator==(const Message& a, const Message& b) {
    return a.kind == b.kind && a.from_host == b.from_host && a.to_host == b.to_host && a.to_vid == b.to_vid &&
           a.value == b.value && same_list(a.hosts, b.hosts);
}

// ---------------------------------------------------------------------------

PfcMove pfc_step(PfcTag self, std::optional<PfcTag> parent, std::span<const PfcTag> children, bool root_wants_wave) {
    const auto all = [&](PfcTag t) { return std::all_of(children.begin(), children.end(), [t](PfcTag c) { return c == t; }); };
    const bool root = !parent.has_value();
    switch (self) {
        case PfcTag::Clean:
            if (root) return root_wants_wave && all(PfcTag::Clean) ? PfcMove::Initiate : PfcMove::Stay;
            return *parent == PfcTag::Propagate && all(PfcTag::Clean) ? PfcMove::Propagate : PfcMove::Stay;
        case PfcTag::Propagate:
            return all(PfcTag::Feedback) ? PfcMove::Feedback : PfcMove::Stay;
        case PfcTag::Feedback:
            if (!all(PfcTag::Clean)) return PfcMove::Stay;
            return root || *parent == PfcTag::Feedback ? PfcMove::Clean : PfcMove::Stay;
    }
    return PfcMove::Stay;
}

bool pfc_pair_reachable(const PfcState& parent, const PfcState& child) {
    using enum PfcTag;
    if (parent.tag != Clean && parent.payload.kind == WaveKind::None) return false;
    if (child.tag != Clean && child.payload.kind == WaveKind::None) return false;
    if (parent.tag == Clean) return child.tag == Clean;
    if (child.tag == Clean) return true;
    if (parent.tag == Feedback && child.tag == Propagate) return false;
    return parent.payload.kind == child.payload.kind;
}

// ---------------------------------------------------------------------------

const GuestNodeState* HostState::find(NodeId vid) const {
    auto it = std::lower_bound(guests.begin(), guests.end(), vid, [](const GuestNodeState& g, NodeId v) { return g.vid < v; });
    return it != guests.end() && it->vid == vid ? &*it : nullptr;
}

GuestNodeState* HostState::find(NodeId vid) {
    return const_cast<GuestNodeState*>(std::as_const(*this).find(vid));
}

bool HostState::any_merging() const {
    return std::any_of(guests.begin(), guests.end(), [](const GuestNodeState& g) { return g.role.tag == RoleTag::Merging; });
}

GuestNodeState clean_guest(NodeId vid, NodeId host) {
    GuestNodeState g;
    g.vid = vid;
    g.host = host;
    g.cluster = host;
    return g;
}

void reset(HostState& host, NodeId n, std::int64_t round) {
    host.cluster_succ = kNone;
    host.cluster_pred = kNone;
    host.last_reset_round = round;
    host.guests.clear();
    host.guests.reserve(static_cast<std::size_t>(n));
    for (NodeId v = 0; v < n; ++v) host.guests.push_back(clean_guest(v, host.id));
}

bool reset_allowed(const HostState& host, std::int64_t round) noexcept { return host.last_reset_round < round - 1; }

RoleChoice role_select(std::mt19937_64& rng) {
    const auto bits = rng();
    if (bits >> 63) return RoleChoice::Leader;
    return (bits >> 62) & 1u ? RoleChoice::LongFollower : RoleChoice::ShortFollower;
}

std::int32_t initial_poll_count(RoleChoice choice, const ProtocolConstants& k) {
    switch (choice) {
        case RoleChoice::Leader: return 0;
        case RoleChoice::ShortFollower: return k.short_polls;
        case RoleChoice::LongFollower: return k.long_polls;
    }
    return 0;
}

ConnectPlan connect_followers(std::vector<FollowerRef> followers) {
    std::sort(followers.begin(), followers.end());
    followers.erase(std::unique(followers.begin(), followers.end()), followers.end());
    ConnectPlan plan;
    std::size_t i = 0;
    for (; i + 1 < followers.size(); i += 2) plan.pairs.emplace_back(followers[i], followers[i + 1]);
    if (i < followers.size()) plan.leftover = followers[i];
    return plan;
}

// ---------------------------------------------------------------------------

bool merge_guard(const ReplaceSide& c, const ReplaceSide& d, std::uint64_t beacon) {
    return c.partner == d.cluster && d.partner == c.cluster && c.cluster != d.cluster && c.rs == beacon &&
           d.rs == beacon;
}

ReplaceOutcome replace_node(NodeId vid, const ReplaceSide& c, const ReplaceSide& d, std::uint64_t beacon,
                            const HostSet& merged) {
    ReplaceOutcome out;
    if (!merge_guard(c, d, beacon) || !merged.contains(c.host) || !merged.contains(d.host)) return out;
    const auto rm = ranges(merged.n(), merged);
    const auto owner = host_of(rm, vid);
    if (owner != c.host) {
        out.action = owner == d.host ? ReplaceAction::Splice : ReplaceAction::Abort;
        return out;
    }
    const auto ids = merged.ids();
    const auto it = std::lower_bound(ids.begin(), ids.end(), c.host);
    out.new_pred = it == ids.begin() ? kNone : *std::prev(it);
    out.new_succ = std::next(it) == ids.end() ? kNone : *std::next(it);
    const auto& mine = rm.range_of(c.host);
    for (const auto x : c.held)
        if (!mine.contains(x)) out.lost.push_back(x);
    if (out.new_succ != c.succ) out.action = ReplaceAction::UpdateSucc;
    else if (out.new_pred != c.pred) out.action = ReplaceAction::UpdatePred;
    else out.action = ReplaceAction::Keep;
    return out;
}

// ---------------------------------------------------------------------------

bool LocalView::linked(NodeId a, NodeId b) const {
    const auto& adj = (*adjacency)[static_cast<std::size_t>(a)];
    return std::binary_search(adj.begin(), adj.end(), b);
}

bool LocalView::adjacent(NodeId h) const { return h != self->id && h >= 0 && h < n() && linked(self->id, h); }

const HostState* LocalView::host(NodeId id) const {
    if (id == self->id) return self;
    auto it = std::lower_bound(neighbours.begin(), neighbours.end(), id, [](const HostState* h, NodeId x) { return h->id < x; });
    return it != neighbours.end() && (*it)->id == id ? *it : nullptr;
}

std::optional<NodeId> LocalView::introducer(NodeId a, NodeId b) const {
    if (a < 0 || b < 0 || a >= n() || b >= n()) return std::nullopt;
    const auto& x = (*adjacency)[static_cast<std::size_t>(a)];
    const auto& y = (*adjacency)[static_cast<std::size_t>(b)];
    auto i = x.begin();
    auto j = y.begin();
    while (i != x.end() && j != y.end()) {
        if (*i == *j) return *i;
        if (*i < *j) ++i;
        else ++j;
    }
    return std::nullopt;
}

LocalView make_view(const HostState& self, std::vector<const HostState*> neighbours,
                    const std::vector<std::vector<NodeId>>& adjacency, const GuestGraph& graph,
                    const SpanningTree& tree) {
    LocalView v;
    v.self = &self;
    std::sort(neighbours.begin(), neighbours.end(), [](const HostState* a, const HostState* b) { return a->id < b->id; });
    v.neighbours = std::move(neighbours);
    v.adjacency = &adjacency;
    v.graph = &graph;
    v.tree = &tree;
    v.by_vid.resize(static_cast<std::size_t>(graph.n));
    const auto add = [&](const HostState& h) {
        for (const auto& g : h.guests)
            if (g.vid >= 0 && g.vid < graph.n) v.by_vid[static_cast<std::size_t>(g.vid)].push_back({&h, &g});
    };
    add(self);
    for (const auto* h : v.neighbours) add(*h);
    return v;
}

bool is_cluster_root(const GuestNodeState& node, NodeId host) noexcept { return node.vid == 0 && node.cluster == host; }

namespace {

bool in_pair(NodeId x, const GuestNodeState& m) { return x == m.cluster || x == m.partner; }

bool survivor(const GuestNodeState& g) {
    return g.role.tag != RoleTag::Merging || g.stage == MergeStage::Resolved || g.stage == MergeStage::Done;
}

}  // namespace

GuestRef tree_peer(const LocalView& view, const GuestNodeState& node, NodeId vid) {
    if (vid < 0 || vid >= view.n()) return {};
    const auto& cands = view.by_vid[static_cast<std::size_t>(vid)];
    if (node.role.tag == RoleTag::Merging) {
        // Before resolution a node talks to its own side; afterwards to survivors.
        const bool before = node.stage == MergeStage::Prepared || node.stage == MergeStage::Resolving;
        for (const auto& c : cands) {
            if (before) {
                if (c.node->cluster == node.cluster) return c;
            } else if (in_pair(c.node->cluster, node) && survivor(*c.node)) {
                return c;
            }
        }
        return {};
    }
    for (const auto& c : cands)
        if (c.node->cluster == node.cluster) return c;
    for (const auto& c : cands)
        if (c.node->role.tag == RoleTag::Merging && in_pair(node.cluster, *c.node) && survivor(*c.node)) return c;
    return {};
}

WatchdogLimits watchdog_limits(std::int32_t tree_depth) {
    WatchdogLimits w;
    w.wave = 2 * tree_depth + 4;
    w.phase = 3 * w.wave + 10;
    w.connect = 12 * w.wave + 20;
    w.follow_await = 10 * w.wave;
    w.merge_await = 6 * w.wave;
    w.merge_node = 14 * w.wave + 20;
    return w;
}

}  // namespace avatar
