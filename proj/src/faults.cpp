#include "avatar/protocol.hpp"

#include <algorithm>
#include <set>

namespace avatar {

namespace {

bool has_settle_wave(const HostState& h) {
    return std::any_of(h.guests.begin(), h.guests.end(),
                       [](const GuestNodeState& g) { return g.pfc.payload.kind == WaveKind::Settle; });
}

bool pair_has(const GuestNodeState& m, NodeId x) { return m.cluster == x || m.partner == x; }

bool resolved_survivor(const GuestNodeState& g) {
    return g.stage == MergeStage::Resolved || g.stage == MergeStage::Done;
}

std::int32_t phase_limit(RootPhase phase, const WatchdogLimits& w) {
    switch (phase) {
        case RootPhase::LeadConnect: return w.connect;
        case RootPhase::FollowAwait: return w.follow_await + w.phase;
        case RootPhase::MergeAwait: return w.merge_await + w.phase;
        case RootPhase::MergeResolve: return w.merge_node;
        default: return w.phase;
    }
}

bool follower_role(RoleTag t) {
    return t == RoleTag::ShortFollower || t == RoleTag::LongFollower || t == RoleTag::PotentialFollower ||
           t == RoleTag::Follower;
}

}  // namespace

FaultReason detect_host_fault(const LocalView& view, const WatchdogLimits&) {
    const HostState& self = *view.self;
    const NodeId n = view.n();
    if (self.guests.empty()) return FaultReason::EmptyHost;

    NodeId plain = kNone;
    std::pair<NodeId, NodeId> pair{kNone, kNone};
    bool any_merging = false;
    for (const auto& g : self.guests) {
        if (g.role.tag == RoleTag::Merging) {
            const std::pair<NodeId, NodeId> p{std::min(g.cluster, g.partner), std::max(g.cluster, g.partner)};
            if (any_merging && p != pair) return FaultReason::MixedPhases;
            pair = p;
            any_merging = true;
        } else {
            if (plain != kNone && g.cluster != plain) return FaultReason::MixedPhases;
            plain = g.cluster;
        }
    }
    if (any_merging && plain != kNone && plain != pair.first && plain != pair.second) return FaultReason::MixedPhases;
    // A cluster only starts merging after its follower polling is over.
    if (any_merging && std::any_of(self.guests.begin(), self.guests.end(), [](const GuestNodeState& g) {
            return g.role.tag == RoleTag::ShortFollower || g.role.tag == RoleTag::LongFollower ||
                   g.role.tag == RoleTag::PotentialFollower;
        }))
        return FaultReason::MixedPhases;
    if (any_merging) return FaultReason::None;

    const NodeId k = plain;
    const NodeId succ = self.cluster_succ;
    const NodeId pred = self.cluster_pred;
    if (pred != kNone && (pred >= self.id || pred < 0)) return FaultReason::PointerMismatch;
    if (succ != kNone && (succ <= self.id || succ >= n)) return FaultReason::PointerMismatch;
    if ((pred == kNone) != (k == self.id) || k > self.id) return FaultReason::ClusterId;
    const NodeId lo = pred == kNone ? 0 : self.id;
    const NodeId hi = succ == kNone ? n : succ;
    if (static_cast<NodeId>(self.guests.size()) != hi - lo || self.guests.front().vid != lo ||
        self.guests.back().vid != hi - 1)
        return FaultReason::RangeMismatch;

    for (const auto& [p, mine_is_succ] : {std::pair{succ, true}, std::pair{pred, false}}) {
        if (p == kNone) continue;
        const HostState* ph = view.host(p);
        if (ph == nullptr || ph == &self) return FaultReason::PointerMismatch;
        if (ph->any_merging() || ph->guests.empty()) continue;
        if (ph->cluster() != k) return FaultReason::PointerMismatch;
        if ((mine_is_succ ? ph->cluster_pred : ph->cluster_succ) != self.id) return FaultReason::PointerMismatch;
    }

    if (has_settle_wave(self)) return FaultReason::None;
    std::set<NodeId> required;
    if (succ != kNone) required.insert(succ);
    if (pred != kNone) required.insert(pred);
    for (const auto& g : self.guests) {
        for (const auto w : view.graph->adjacency[static_cast<std::size_t>(g.vid)]) {
            for (const auto& c : view.by_vid[static_cast<std::size_t>(w)])
                if (c.node->cluster == k && c.host != &self) required.insert(c.host->id);
        }
    }
    for (const auto* h : view.neighbours) {
        if (h->guests.empty() || h->any_merging() || has_settle_wave(*h)) continue;
        if (h->cluster() == k && !required.contains(h->id)) return FaultReason::ExtraEdge;
    }
    return FaultReason::None;
}

bool pfc_locally_legal(const LocalView& view, const GuestNodeState& node) {
    if (node.pfc.tag != PfcTag::Clean && node.pfc.payload.kind == WaveKind::None) return false;
    const auto& tree = *view.tree;
    const auto parent = tree.parent[static_cast<std::size_t>(node.vid)];
    if (parent != kNone) {
        if (const auto p = tree_peer(view, node, parent); p.node && !pfc_pair_reachable(p.node->pfc, node.pfc)) return false;
    }
    for (const auto c : tree.children[static_cast<std::size_t>(node.vid)]) {
        if (const auto ch = tree_peer(view, node, c); ch.node && !pfc_pair_reachable(node.pfc, ch.node->pfc)) return false;
    }
    return true;
}

FaultReason detect_reset_fault(const LocalView& view, const GuestNodeState& node, const WatchdogLimits& limits) {
    const HostState& self = *view.self;
    const NodeId n = view.n();
    if (node.cluster < 0 || node.cluster >= n || node.cluster > self.id) return FaultReason::ClusterId;
    if (node.vid == 0 && node.cluster != self.id) return FaultReason::ClusterId;

    const bool merging = node.role.tag == RoleTag::Merging;
    if (merging != (node.stage != MergeStage::None)) return FaultReason::MergeState;
    if (merging) {
        if (node.partner < 0 || node.partner >= n || node.partner == node.cluster) return FaultReason::MergeState;
        if (node.stage == MergeStage::Resolving && (node.counterpart_host < 0 || node.counterpart_host >= n))
            return FaultReason::MergeState;
        if (resolved_survivor(node) && !node.merged_hosts) return FaultReason::MergeState;
        if (node.merge_age > limits.merge_node) return FaultReason::MergeWatchdog;
    } else if (node.partner != kNone) {
        const bool matched_root = is_cluster_root(node, self.id) &&
                                  (node.phase == RootPhase::LeadConnect || node.phase == RootPhase::FollowAnnounce ||
                                   node.phase == RootPhase::FollowAwait || node.phase == RootPhase::MergePrep);
        if (!matched_root || node.partner < 0 || node.partner >= n || node.partner == node.cluster)
            return FaultReason::MergeState;
    }

    if (node.pfc_bad_rounds >= 1 && !pfc_locally_legal(view, node)) return FaultReason::PfcState;
    if (node.pfc.tag == PfcTag::Clean && node.pfc.payload.kind != WaveKind::None) return FaultReason::PfcState;

    if (node.poll_cnt < 0 || node.poll_cnt > 12) return FaultReason::PollCount;
    if (node.poll_cnt > 0 && !follower_role(node.role.tag)) return FaultReason::PollCount;
    if (node.role.tag == RoleTag::Follower || node.role.tag == RoleTag::PotentialFollower) {
        const auto& l = node.role.leader;
        if (!l.valid() || l.cluster == node.cluster || l.host < 0 || l.host >= n) return FaultReason::RoleState;
    }

    if (is_cluster_root(node, self.id) && node.phase_age > phase_limit(node.phase, limits))
        return FaultReason::RootWatchdog;

    const auto& tree = *view.tree;
    const auto vid = static_cast<std::size_t>(node.vid);
    if (merging) {
        const auto check = [&](NodeId w) {
            const auto& cands = view.by_vid[static_cast<std::size_t>(w)];
            return std::any_of(cands.begin(), cands.end(), [&](const GuestRef& c) { return pair_has(node, c.node->cluster); });
        };
        if (tree.parent[vid] != kNone && !check(tree.parent[vid])) return FaultReason::TreeNeighbour;
        for (const auto c : tree.children[vid])
            if (!check(c)) return FaultReason::TreeNeighbour;
        return FaultReason::None;
    }

    const auto check = [&](NodeId w) {
        int exact = 0;
        bool merged_peer = false;
        for (const auto& c : view.by_vid[static_cast<std::size_t>(w)]) {
            if (c.node->cluster == node.cluster) ++exact;
            else if (c.node->role.tag == RoleTag::Merging && pair_has(*c.node, node.cluster) && resolved_survivor(*c.node))
                merged_peer = true;
        }
        return exact == 1 || (exact == 0 && merged_peer);
    };
    if (tree.parent[vid] != kNone && !check(tree.parent[vid])) return FaultReason::TreeNeighbour;
    for (const auto c : tree.children[vid])
        if (!check(c)) return FaultReason::TreeNeighbour;
    if (!self.any_merging()) {
        for (const auto w : view.graph->adjacency[vid])
            if (!check(w)) return FaultReason::GuestNeighbour;
    }
    return FaultReason::None;
}

}  // namespace avatar
