#include "avatar/protocol.hpp"

#include <algorithm>
#include <set>

namespace avatar {

namespace {

struct Round {
    const StepContext& ctx;
    const LocalView& view;
    const HostState& snap;
    HostState& next;
    HostStepResult& out;

    bool guard_failed = false;
    HostList settle_hosts;  // Settle wave reached a guest here this round
    HostList prune_hosts;   // a guest here finished a Settle wave this round
    std::vector<NodeId> removed;
    std::vector<EdgeOp> committed;  // matched-edge removals that survive a later guard failure

    [[nodiscard]] NodeId id() const { return snap.id; }

    // Also emitted for an existing edge so that a same-round deletion cannot win.
    bool create_edge(NodeId a, NodeId b) {
        if (a == b) return true;
        if (!view.linked(a, b) && !view.introducer(a, b)) return false;
        out.edges.push_back({std::min(a, b), std::max(a, b), id(), true, false});
        return true;
    }

    void delete_edge(NodeId other, bool protocol_only) {
        if (other == id() || !view.linked(id(), other)) return;
        out.edges.push_back({std::min(id(), other), std::max(id(), other), id(), false, protocol_only});
    }

    void send(MsgKind kind, NodeId to_host, NodeId to_vid, NodeId value, HostList hosts = {}) {
        out.messages.push_back({kind, id(), to_host, to_vid, value, std::move(hosts)});
    }
};

void set_phase(GuestNodeState& nx, RootPhase phase) {
    nx.phase = phase;
    nx.phase_age = -1;  // incremented to 0 at the end of the round
    nx.wave_started = false;
}

bool leader_tag(RoleTag t) { return t == RoleTag::OpenLeader || t == RoleTag::ClosedLeader; }

WavePayload propagate_half(const WavePayload& p) {
    WavePayload out = p;
    out.candidate = {};
    out.relayed = false;
    out.members = nullptr;
    return out;
}

/// Hosts adjacent to `host` in Avatar(N, members).
std::set<NodeId> required_neighbours(const GuestGraph& g, const std::vector<NodeId>& members, NodeId host) {
    std::set<NodeId> out;
    const HostSet hs(members, g.n);
    const auto rm = ranges(g.n, hs);
    std::vector<NodeId> owner(static_cast<std::size_t>(g.n));
    for (const auto& r : rm.ranges)
        for (NodeId x = r.lo; x < r.hi; ++x) owner[static_cast<std::size_t>(x)] = r.host;
    const auto ids = hs.ids();
    const auto it = std::lower_bound(ids.begin(), ids.end(), host);
    if (it == ids.end() || *it != host) return out;
    if (it != ids.begin()) out.insert(*std::prev(it));
    if (std::next(it) != ids.end()) out.insert(*std::next(it));
    const auto& mine = rm.range_of(host);
    for (NodeId x = mine.lo; x < mine.hi; ++x)
        for (const auto w : g.adjacency[static_cast<std::size_t>(x)])
            if (owner[static_cast<std::size_t>(w)] != host) out.insert(owner[static_cast<std::size_t>(w)]);
    return out;
}

bool valid_members(const HostList& list, NodeId n, NodeId must_a, NodeId must_b) {
    if (!list || list->empty()) return false;
    for (const auto h : *list)
        if (h < 0 || h >= n) return false;
    const auto has = [&](NodeId x) { return std::binary_search(list->begin(), list->end(), x); };
    return has(must_a) && has(must_b);
}

const GuestNodeState* counterpart(const LocalView& view, const GuestNodeState& s) {
    const HostState* h = view.host(s.counterpart_host);
    if (h == nullptr || h == view.self) return nullptr;
    const GuestNodeState* c = h->find(s.vid);
    if (c == nullptr || c->role.tag != RoleTag::Merging || c->stage != MergeStage::Resolving ||
        c->counterpart_host != view.self->id)
        return nullptr;
    return c;
}

// ---------------------------------------------------------------------------

void root_program(Round& R, const GuestNodeState& s, GuestNodeState& nx, bool& wants, WavePayload& init) {
    const auto& lim = R.ctx.limits;
    switch (s.phase) {
        case RootPhase::Idle: {
            if (s.pfc.tag != PfcTag::Clean || s.role.tag == RoleTag::Merging) break;
            const auto choice = role_select(*R.ctx.rng);
            nx.rs = R.ctx.beacon;
            nx.partner = kNone;
            nx.chosen_leader = {};
            nx.poll_cnt = initial_poll_count(choice, R.ctx.constants);
            nx.long_follower = choice == RoleChoice::LongFollower;
            set_phase(nx, choice == RoleChoice::Leader ? RootPhase::LeadInform : RootPhase::FollowInform);
            break;
        }
        case RootPhase::FollowAwait: {
            if (nx.partner != kNone) {
                set_phase(nx, RootPhase::MergePrep);
                break;
            }
            const auto& l = s.role.leader;
            const HostState* lh = R.view.host(l.host);
            const GuestNodeState* lg = lh && lh != R.view.self ? lh->find(l.vid) : nullptr;
            const bool alive = lg && lg->cluster == l.cluster && leader_tag(lg->role.tag);
            if (!alive || s.phase_age >= lim.follow_await) {
                nx.role = {};
                set_phase(nx, RootPhase::Idle);
            }
            break;
        }
        case RootPhase::MergeAwait:
            if (s.stage == MergeStage::Resolving && counterpart(R.view, s) == nullptr && s.phase_age >= lim.merge_await)
                set_phase(nx, RootPhase::MergeSettle);
            break;
        case RootPhase::MergeResolve:
            if (s.stage == MergeStage::Done) set_phase(nx, RootPhase::MergeSettle);
            break;
        default: break;
    }

    if (nx.wave_started) return;
    WavePayload p;
    switch (nx.phase) {
        case RootPhase::LeadInform:
            p.kind = WaveKind::LeadInform;
            p.rs = nx.rs;
            break;
        case RootPhase::LeadClose: p.kind = WaveKind::Close; break;
        case RootPhase::LeadConnect: p.kind = WaveKind::ConnectFollowers; break;
        case RootPhase::FollowInform:
            p.kind = WaveKind::FollowerInform;
            p.long_follower = nx.long_follower;
            p.rs = nx.rs;
            break;
        case RootPhase::FollowPoll: p.kind = WaveKind::Poll; break;
        case RootPhase::FollowAnnounce:
            p.kind = WaveKind::FollowLeader;
            p.leader = nx.chosen_leader;
            p.target = nx.chosen_leader.cluster;
            break;
        case RootPhase::MergePrep:
            p.kind = WaveKind::Prep;
            p.target = nx.partner;
            p.rs = nx.rs;
            break;
        case RootPhase::MergeSettle:
            p.kind = WaveKind::Settle;
            if (nx.stage == MergeStage::Done) {
                p.target = std::min(nx.cluster, nx.partner);
                p.hosts = nx.merged_hosts;
            } else {
                p.target = nx.cluster;
                p.hosts = nx.members ? nx.members : make_host_list({R.id()});
            }
            break;
        default: return;
    }
    wants = true;
    init = std::move(p);
}

void on_propagate(Round& R, const GuestNodeState& s, GuestNodeState& nx, const WavePayload& p) {
    const bool root = is_cluster_root(s, R.id());
    switch (p.kind) {
        case WaveKind::LeadInform:
            nx.role = {RoleTag::OpenLeader, {}};
            nx.rs = p.rs;
            if (!root) nx.partner = kNone;
            break;
        case WaveKind::Close: nx.role = {RoleTag::ClosedLeader, {}}; break;
        case WaveKind::ConnectFollowers: nx.adopted.clear(); break;
        case WaveKind::FollowerInform:
            nx.role = {p.long_follower ? RoleTag::LongFollower : RoleTag::ShortFollower, {}};
            nx.rs = p.rs;
            break;
        case WaveKind::FollowLeader: nx.role = {RoleTag::Follower, p.leader}; break;
        case WaveKind::Prep:
            nx.role = {RoleTag::Merging, {}};
            nx.partner = p.target;
            nx.stage = MergeStage::Prepared;
            nx.merge_age = 0;
            nx.rs = p.rs;
            nx.child_hosts.clear();
            nx.counterpart_host = kNone;
            nx.merged_hosts = nullptr;
            break;
        case WaveKind::Settle:
            nx.cluster = p.target;
            nx.role = {};
            nx.partner = kNone;
            nx.stage = MergeStage::None;
            nx.counterpart_host = kNone;
            nx.merged_hosts = nullptr;
            nx.child_hosts.clear();
            nx.pending_links.clear();
            nx.merge_age = 0;
            R.settle_hosts = p.hosts;
            break;
        default: break;
    }
}

bool connect_followers_action(Round& R, const GuestNodeState& s, GuestNodeState& nx) {
    const LeaderRef me{s.cluster, s.vid, R.id()};
    for (const auto* h : R.view.neighbours) {
        for (const auto& g : h->guests) {
            if (g.role.leader != me) continue;
            if (g.role.tag == RoleTag::PotentialFollower) return false;
            if (g.role.tag == RoleTag::Follower && !is_cluster_root(g, h->id)) return false;
        }
    }
    std::vector<FollowerRef> followers;
    for (const auto* h : R.view.neighbours) {
        const GuestNodeState* r = h->find(0);
        if (r && is_cluster_root(*r, h->id) && r->role.tag == RoleTag::Follower && r->role.leader == me &&
            r->partner == kNone)
            followers.push_back({h->id});
    }
    for (const auto& b : nx.adopted)
        if (R.view.adjacent(b.cluster) && b.cluster != s.cluster) followers.push_back(b);
    nx.adopted.clear();

    const auto plan = connect_followers(std::move(followers));
    for (const auto& [b1, b2] : plan.pairs) {
        R.create_edge(b1.cluster, b2.cluster);
        R.send(MsgKind::AssignPartner, b1.cluster, 0, b2.cluster);
        R.send(MsgKind::AssignPartner, b2.cluster, 0, b1.cluster);
        R.delete_edge(b2.cluster, true);
    }
    if (plan.leftover) {
        const NodeId b = plan.leftover->cluster;
        const NodeId parent = R.view.tree->parent[static_cast<std::size_t>(s.vid)];
        if (parent == kNone) {
            if (nx.partner == kNone) {
                nx.partner = b;
                R.send(MsgKind::AssignPartner, b, 0, s.cluster);
            }
        } else if (const auto pr = tree_peer(R.view, s, parent); pr.node) {
            const NodeId ph = pr.host->id;
            if (ph != R.id()) {
                R.create_edge(ph, b);
                R.delete_edge(b, true);
            }
            R.send(MsgKind::AdoptFollower, ph, parent, b);
        }
    }
    return true;
}

bool on_feedback(Round& R, const GuestNodeState& s, GuestNodeState& nx, const std::vector<GuestRef>& kids) {
    WavePayload f = propagate_half(s.pfc.payload);
    switch (f.kind) {
        case WaveKind::Poll: {
            LeaderRef best;
            NodeId via = kNone;
            if (s.role.tag == RoleTag::PotentialFollower && R.view.adjacent(s.role.leader.host)) {
                best = s.role.leader;
                via = R.id();
            } else {
                for (const auto& k : kids) {
                    const auto& c = k.node->pfc.payload.candidate;
                    if (c.valid() && (!best.valid() || c < best)) {
                        best = c;
                        via = k.host->id;
                    }
                }
            }
            if (best.valid() && via != R.id()) {
                if (best.host == R.id() || !R.create_edge(R.id(), best.host)) best = {};
            }
            f.candidate = best;
            f.relayed = best.valid() && via != R.id();
            break;
        }
        case WaveKind::Prep: {
            std::vector<NodeId> members{R.id()};
            nx.child_hosts.clear();
            for (const auto& k : kids) {
                nx.child_hosts.push_back(k.host->id);
                if (const auto& m = k.node->pfc.payload.members) members.insert(members.end(), m->begin(), m->end());
            }
            f.members = make_host_list(std::move(members));
            break;
        }
        case WaveKind::ConnectFollowers:
            if (!connect_followers_action(R, s, nx)) return false;
            break;
        default: break;
    }
    nx.pfc = {PfcTag::Feedback, std::move(f)};
    return true;
}

void on_clean(Round& R, const GuestNodeState& s, GuestNodeState& nx, const WavePayload& done) {
    if (done.kind == WaveKind::FollowLeader && !is_cluster_root(s, R.id())) nx.role = {};
    if (done.kind == WaveKind::Settle) R.prune_hosts = done.hosts;
}

void wave_complete(Round& R, const GuestNodeState& s, GuestNodeState& nx, const WavePayload& done) {
    static constexpr std::pair<RootPhase, WaveKind> kExpected[] = {
        {RootPhase::LeadInform, WaveKind::LeadInform},      {RootPhase::LeadClose, WaveKind::Close},
        {RootPhase::LeadConnect, WaveKind::ConnectFollowers}, {RootPhase::FollowInform, WaveKind::FollowerInform},
        {RootPhase::FollowPoll, WaveKind::Poll},              {RootPhase::FollowAnnounce, WaveKind::FollowLeader},
        {RootPhase::MergePrep, WaveKind::Prep},               {RootPhase::MergeSettle, WaveKind::Settle},
    };
    const auto it = std::find_if(std::begin(kExpected), std::end(kExpected),
                                 [&](const auto& e) { return e.first == s.phase; });
    if (it == std::end(kExpected) || it->second != done.kind) {
        if (s.role.tag != RoleTag::Merging) set_phase(nx, RootPhase::Idle);
        return;
    }
    switch (done.kind) {
        case WaveKind::LeadInform: set_phase(nx, RootPhase::LeadClose); break;
        case WaveKind::Close: set_phase(nx, RootPhase::LeadConnect); break;
        case WaveKind::ConnectFollowers:
            set_phase(nx, nx.partner != kNone ? RootPhase::MergePrep : RootPhase::Idle);
            break;
        case WaveKind::FollowerInform: set_phase(nx, RootPhase::FollowPoll); break;
        case WaveKind::Poll: {
            nx.poll_cnt = std::max(0, nx.poll_cnt - 1);
            const auto& c = done.candidate;
            if (c.valid() && c.cluster != s.cluster && R.view.adjacent(c.host)) {
                nx.chosen_leader = c;
                nx.poll_cnt = 0;
                set_phase(nx, RootPhase::FollowAnnounce);
            } else if (nx.poll_cnt > 0) {
                set_phase(nx, RootPhase::FollowPoll);
            } else {
                nx.role = {};
                set_phase(nx, RootPhase::Idle);
            }
            break;
        }
        case WaveKind::FollowLeader:
            set_phase(nx, nx.partner != kNone ? RootPhase::MergePrep : RootPhase::FollowAwait);
            break;
        case WaveKind::Prep:
            nx.stage = MergeStage::Resolving;
            nx.counterpart_host = nx.partner;
            nx.members = done.members;
            set_phase(nx, RootPhase::MergeAwait);
            break;
        case WaveKind::Settle:
            nx.members = nullptr;
            set_phase(nx, RootPhase::Idle);
            break;
        default: set_phase(nx, RootPhase::Idle); break;
    }
}

void resolve(Round& R, const GuestNodeState& s, GuestNodeState& nx, const GuestNodeState& c) {
    const NodeId n = R.view.n();
    const NodeId ch = s.counterpart_host;
    const bool root_pair = s.vid == 0;

    HostList merged;
    if (root_pair) {
        if (!valid_members(s.members, n, R.id(), R.id()) || !valid_members(c.members, n, ch, ch)) {
            R.guard_failed = true;
            return;
        }
        std::vector<NodeId> u(s.members->begin(), s.members->end());
        u.insert(u.end(), c.members->begin(), c.members->end());
        merged = make_host_list(std::move(u));
    } else {
        if (!valid_members(s.merged_hosts, n, R.id(), ch) || !valid_members(c.merged_hosts, n, R.id(), ch) ||
            *s.merged_hosts != *c.merged_hosts) {
            R.guard_failed = true;
            return;
        }
        merged = s.merged_hosts;
    }

    ReplaceSide me{R.id(), s.cluster, s.partner, s.rs, R.snap.cluster_succ, R.snap.cluster_pred, {}};
    const ReplaceSide other{ch, c.cluster, c.partner, c.rs, kNone, kNone, {}};
    for (const auto& g : R.snap.guests) me.held.push_back(g.vid);
    if (!merge_guard(me, other, R.ctx.beacon)) {
        R.guard_failed = true;
        return;
    }
    if (root_pair) {
        // Drop the matching edges into the partner cluster, keeping the root link.
        for (const auto h : *c.members) {
            if (h != ch && h != R.id() && R.view.adjacent(h))
                R.committed.push_back({std::min(h, R.id()), std::max(h, R.id()), R.id(), false, false});
        }
    }
    const HostSet union_set(*merged, n);
    const auto outcome = replace_node(s.vid, me, other, R.ctx.beacon, union_set);
    const auto& kids = R.view.tree->children[static_cast<std::size_t>(s.vid)];
    if (outcome.action == ReplaceAction::Abort || s.child_hosts.size() != kids.size() ||
        c.child_hosts.size() != kids.size()) {
        R.guard_failed = true;
        return;
    }

    if (outcome.action == ReplaceAction::Splice) {
        R.removed.push_back(s.vid);
        for (std::size_t i = 0; i < kids.size(); ++i) {
            R.create_edge(s.child_hosts[i], ch);
            R.send(MsgKind::ResolveNext, s.child_hosts[i], kids[i], c.child_hosts[i], merged);
        }
        return;
    }
    nx.stage = MergeStage::Resolved;
    nx.merged_hosts = merged;
    nx.pending_links.clear();
    for (std::size_t i = 0; i < kids.size(); ++i) {
        nx.pending_links.emplace_back(s.child_hosts[i], c.child_hosts[i]);
        R.send(MsgKind::ResolveNext, s.child_hosts[i], kids[i], c.child_hosts[i], merged);
    }
    if (root_pair) set_phase(nx, RootPhase::MergeResolve);
}

void merge_progress(Round& R, const GuestNodeState& s, GuestNodeState& nx) {
    if (s.role.tag != RoleTag::Merging) return;
    if (s.stage == MergeStage::Resolving) {
        if (const auto* c = counterpart(R.view, s)) resolve(R, s, nx, *c);
        return;
    }
    if (s.stage != MergeStage::Resolved) return;
    if (!s.pending_links.empty()) {
        for (const auto& [a, b] : s.pending_links) R.create_edge(a, b);
        nx.pending_links.clear();
        return;
    }
    for (const auto k : R.view.tree->children[static_cast<std::size_t>(s.vid)]) {
        const auto& cands = R.view.by_vid[static_cast<std::size_t>(k)];
        const bool done = std::any_of(cands.begin(), cands.end(), [&](const GuestRef& g) {
            return g.node->role.tag == RoleTag::Merging && g.node->stage == MergeStage::Done &&
                   (g.node->cluster == s.cluster || g.node->cluster == s.partner);
        });
        if (!done) return;
    }
    nx.stage = MergeStage::Done;
}

void guest_step(Round& R, const GuestNodeState& s, GuestNodeState& nx) {
    const auto& tree = *R.view.tree;
    const bool root = is_cluster_root(s, R.id());
    bool wants = false;
    WavePayload init;
    if (root) root_program(R, s, nx, wants, init);

    const NodeId parent = tree.parent[static_cast<std::size_t>(s.vid)];
    GuestRef pr;
    bool can_step = parent != kNone || root;
    if (parent != kNone) {
        pr = tree_peer(R.view, s, parent);
        can_step = pr.node != nullptr;
    }
    std::vector<GuestRef> kids;
    std::vector<PfcTag> tags;
    for (const auto c : tree.children[static_cast<std::size_t>(s.vid)]) {
        const auto cr = tree_peer(R.view, s, c);
        if (!cr.node) {
            can_step = false;
            break;
        }
        kids.push_back(cr);
        tags.push_back(cr.node->pfc.tag);
    }

    if (can_step) {
        const auto move = pfc_step(s.pfc.tag, pr.node ? std::optional{pr.node->pfc.tag} : std::nullopt, tags, wants);
        switch (move) {
            case PfcMove::Initiate:
                if (init.kind == WaveKind::Settle && nx.stage == MergeStage::Done) ++R.out.merges_completed;
                nx.pfc = {PfcTag::Propagate, init};
                nx.wave_started = true;
                on_propagate(R, s, nx, init);
                break;
            case PfcMove::Propagate: {
                auto p = propagate_half(pr.node->pfc.payload);
                nx.pfc = {PfcTag::Propagate, p};
                on_propagate(R, s, nx, p);
                break;
            }
            case PfcMove::Feedback: on_feedback(R, s, nx, kids); break;
            case PfcMove::Clean: {
                const WavePayload done = s.pfc.payload;
                nx.pfc = {};
                on_clean(R, s, nx, done);
                if (root) wave_complete(R, s, nx, done);
                break;
            }
            case PfcMove::Stay: break;
        }
    }
    merge_progress(R, s, nx);
}

void apply_messages(Round& R, std::span<const Message> inbox) {
    for (const auto& m : inbox) {
        GuestNodeState* node = R.next.find(m.to_vid);
        if (node == nullptr) continue;
        switch (m.kind) {
            case MsgKind::AssignPartner:
                if (is_cluster_root(*node, R.id()) && node->role.tag == RoleTag::Follower &&
                    (node->phase == RootPhase::FollowAnnounce || node->phase == RootPhase::FollowAwait) &&
                    node->partner == kNone && m.value != node->cluster && m.value >= 0 && m.value < R.view.n())
                    node->partner = m.value;
                break;
            case MsgKind::AdoptFollower:
                if (node->pfc.tag == PfcTag::Propagate && node->pfc.payload.kind == WaveKind::ConnectFollowers &&
                    std::find(node->adopted.begin(), node->adopted.end(), FollowerRef{m.value}) == node->adopted.end())
                    node->adopted.push_back({m.value});
                break;
            case MsgKind::ResolveNext:
                if (node->role.tag == RoleTag::Merging && node->stage == MergeStage::Prepared && m.hosts) {
                    node->stage = MergeStage::Resolving;
                    node->counterpart_host = m.value;
                    node->merged_hosts = m.hosts;
                }
                break;
        }
    }
}

void settle_effects(Round& R) {
    const auto& g = *R.view.graph;
    if (R.settle_hosts && std::binary_search(R.settle_hosts->begin(), R.settle_hosts->end(), R.id())) {
        const auto& u = *R.settle_hosts;
        const auto it = std::lower_bound(u.begin(), u.end(), R.id());
        R.next.cluster_pred = it == u.begin() ? kNone : *std::prev(it);
        R.next.cluster_succ = std::next(it) == u.end() ? kNone : *std::next(it);
        for (const auto h : required_neighbours(g, u, R.id())) R.create_edge(R.id(), h);
    }
    if (R.prune_hosts && std::binary_search(R.prune_hosts->begin(), R.prune_hosts->end(), R.id())) {
        const auto& u = *R.prune_hosts;
        const auto keep = required_neighbours(g, u, R.id());
        for (const auto* h : R.view.neighbours)
            if (std::binary_search(u.begin(), u.end(), h->id) && !keep.contains(h->id)) R.delete_edge(h->id, false);
    }
}

// A poll candidate travels to the root as a chain of leader links. A host
// that only relayed the candidate drops its copy once its tree parent on
// another host holds the link; the discovering host and the root keep theirs.
void prune_poll_copies(Round& R) {
    const auto& snap = R.snap;
    const auto& tree = *R.view.tree;
    for (const auto& s : snap.guests) {
        if (s.pfc.tag != PfcTag::Feedback || s.pfc.payload.kind != WaveKind::Poll) continue;
        const auto& c = s.pfc.payload.candidate;
        if (!c.valid() || c.host == R.id() || is_cluster_root(s, R.id())) continue;
        const NodeId parent = tree.parent[static_cast<std::size_t>(s.vid)];
        if (parent == kNone) continue;
        const auto pr = tree_peer(R.view, s, parent);
        if (!pr.node || pr.host == R.view.self || pr.node->pfc.tag != PfcTag::Feedback ||
            pr.node->pfc.payload.kind != WaveKind::Poll || pr.node->pfc.payload.candidate != c ||
            !R.view.linked(pr.host->id, c.host))
            continue;
        const bool discoverer = std::any_of(snap.guests.begin(), snap.guests.end(), [&](const GuestNodeState& g) {
            return g.vid == 0 || (g.pfc.payload.kind == WaveKind::Poll && g.pfc.payload.candidate.host == c.host &&
                                  !g.pfc.payload.relayed);
        });
        if (!discoverer) R.delete_edge(c.host, true);
    }
}

// A merging host drops links inside the merged host set that no longer carry
// anything: no pair of guests across the link is equal or adjacent, the link
// is not a cluster pointer, it is not part of the merged embedding, and
// neither end can still introduce the other to a missing merged-embedding link.
void prune_merge_edges(Round& R) {
    const auto& snap = R.snap;
    HostList merged;
    for (const auto& g : snap.guests)
        if (g.role.tag == RoleTag::Merging && g.merged_hosts) {
            merged = g.merged_hosts;
            break;
        }
    if (!merged) return;
    const auto& g = *R.view.graph;
    std::vector<char> near(static_cast<std::size_t>(g.n), 0);
    for (const auto& x : snap.guests) {
        near[static_cast<std::size_t>(x.vid)] = 1;
        for (const auto w : g.adjacency[static_cast<std::size_t>(x.vid)]) near[static_cast<std::size_t>(w)] = 1;
    }
    const auto keep = required_neighbours(g, *merged, R.id());
    for (const auto* h : R.view.neighbours) {
        if (!std::binary_search(merged->begin(), merged->end(), h->id)) continue;
        if (keep.contains(h->id) || h->id == snap.cluster_succ || h->id == snap.cluster_pred) continue;
        if (h->cluster_succ == R.id() || h->cluster_pred == R.id()) continue;
        const bool used = std::any_of(h->guests.begin(), h->guests.end(),
                                      [&](const GuestNodeState& y) { return near[static_cast<std::size_t>(y.vid)] != 0; });
        if (used) continue;
        // Still an introducer for a merged-embedding link that does not exist yet.
        const auto introduces = [&](NodeId a, NodeId b, const std::set<NodeId>& need) {
            return std::any_of(need.begin(), need.end(), [&](NodeId w) { return !R.view.linked(a, w) && R.view.linked(b, w); });
        };
        if (introduces(R.id(), h->id, keep) || introduces(h->id, R.id(), required_neighbours(g, *merged, h->id))) continue;
        R.delete_edge(h->id, false);
    }
}

}  // namespace

HostStepResult host_step(const StepContext& ctx, std::span<const Message> inbox, HostState& next) {
    HostStepResult out;
    const LocalView& view = *ctx.view;
    const HostState& snap = *view.self;
    const NodeId n = view.n();

    FaultReason fault = detect_host_fault(view, ctx.limits);
    for (std::size_t i = 0; i < snap.guests.size(); ++i) {
        const auto& g = snap.guests[i];
        next.guests[i].pfc_bad_rounds = pfc_locally_legal(view, g) ? 0 : g.pfc_bad_rounds + 1;
        if (fault == FaultReason::None) fault = detect_reset_fault(view, g, ctx.limits);
    }
    if (fault != FaultReason::None) {
        out.fault = fault;
        if (reset_allowed(snap, ctx.round)) {
            reset(next, n, ctx.round);
            out.reset = true;
        }
        return out;
    }

    Round R{ctx, view, snap, next, out, false, {}, {}, {}, {}};
    apply_messages(R, inbox);
    for (std::size_t i = 0; i < snap.guests.size(); ++i) guest_step(R, snap.guests[i], next.guests[i]);

    if (R.guard_failed) {
        out = {};
        out.fault = FaultReason::MergeGuard;
        out.edges = R.committed;
        next = snap;
        if (reset_allowed(snap, ctx.round)) {
            reset(next, n, ctx.round);
            out.reset = true;
        }
        return out;
    }

    // Potential-leader discovery: followers adopt the smallest open leader next door.
    LeaderRef best;
    for (const auto* h : view.neighbours)
        for (const auto& g : h->guests)
            if (g.role.tag == RoleTag::OpenLeader && g.cluster != snap.cluster() && (!best.valid() || LeaderRef{g.cluster, g.vid, h->id} < best))
                best = {g.cluster, g.vid, h->id};
    if (best.valid()) {
        for (std::size_t i = 0; i < snap.guests.size(); ++i) {
            auto& nx = next.guests[i];
            const auto t = snap.guests[i].role.tag;
            if ((t == RoleTag::ShortFollower || t == RoleTag::LongFollower) && nx.role.tag == t)
                nx.role = {RoleTag::PotentialFollower, best};
        }
    }

    settle_effects(R);
    prune_merge_edges(R);
    prune_poll_copies(R);
    out.edges.insert(out.edges.end(), R.committed.begin(), R.committed.end());

    for (std::size_t i = 0; i < snap.guests.size(); ++i) {
        auto& nx = next.guests[i];
        if (nx.role.tag == RoleTag::Merging && snap.guests[i].role.tag == RoleTag::Merging) ++nx.merge_age;
        if (nx.vid == 0) ++nx.phase_age;
    }
    if (!R.removed.empty()) {
        std::erase_if(next.guests, [&](const GuestNodeState& g) {
            return std::find(R.removed.begin(), R.removed.end(), g.vid) != R.removed.end();
        });
    }
    return out;
}

}  // namespace avatar
