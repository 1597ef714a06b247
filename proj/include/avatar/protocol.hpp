#pragma once

#include "avatar/embedding.hpp"
#include "avatar/topology.hpp"

#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace avatar {

inline constexpr NodeId kNone = -1;

using HostList = std::shared_ptr<const std::vector<NodeId>>;

HostList make_host_list(std::vector<NodeId> ids);

// ---------------------------------------------------------------------------
// PFC waves

enum class PfcTag : std::uint8_t { Clean, Propagate, Feedback };

/// What a wave carries. The propagate half (I) is fixed by the root; the
/// feedback half (F) is aggregated on the way back up.
enum class WaveKind : std::uint8_t {
    None,
    LeadInform,        // nodes become OpenLeader
    Close,             // nodes become ClosedLeader
    ConnectFollowers,  // feedback action pairs followers
    FollowerInform,    // nodes become Short/LongFollower
    Poll,              // feedback returns at most one potential leader
    FollowLeader,      // nodes learn the chosen leader
    Prep,              // nodes become Merging; feedback collects member hosts
    Settle,            // install merged cluster id, rebuild/prune edges
};

std::string_view to_string(WaveKind kind) noexcept;

/// A guest node of another cluster that acts as a leader.
struct LeaderRef {
    NodeId cluster = kNone;
    NodeId vid = kNone;
    NodeId host = kNone;

    [[nodiscard]] bool valid() const noexcept { return cluster != kNone; }
    friend bool operator==(const LeaderRef&, const LeaderRef&) = default;
    friend auto operator<=>(const LeaderRef& a, const LeaderRef& b) {
        if (auto c = a.cluster <=> b.cluster; c != 0) return c;
        return a.vid <=> b.vid;
    }
};

struct WavePayload {
    WaveKind kind = WaveKind::None;
    // Propagate side.
    NodeId target = kNone;  // FollowLeader: leader cluster; Prep: partner; Settle: new cluster id
    LeaderRef leader;       // FollowLeader
    bool long_follower = false;
    std::optional<std::uint64_t> rs;
    HostList hosts;  // Settle: merged member hosts
    // Feedback side.
    LeaderRef candidate;  // Poll
    bool relayed = false; // Poll: candidate came up from a child
    HostList members;     // Prep

    friend bool operator==(const WavePayload& a, const WavePayload& b);
};

struct PfcState {
    PfcTag tag = PfcTag::Clean;
    WavePayload payload;

    friend bool operator==(const PfcState&, const PfcState&) = default;
};

/// Transition chosen by one synchronous PFC step.
enum class PfcMove : std::uint8_t { Stay, Initiate, Propagate, Feedback, Clean };

/// Guards of the PFC algorithm for one node. `parent` is empty for the root.
/// `root_wants_wave` lets the root start a wave when it and its children are
/// Clean. A node without children treats the child conditions as satisfied.
PfcMove pfc_step(PfcTag self, std::optional<PfcTag> parent, std::span<const PfcTag> children, bool root_wants_wave);

/// Whether (parent, child) PFC tags can appear together inside a proper
/// cluster. Payload kinds must also agree when both are mid-wave.
bool pfc_pair_reachable(const PfcState& parent, const PfcState& child);

// ---------------------------------------------------------------------------
// Roles and node state

enum class RoleTag : std::uint8_t {
    Undecided,
    OpenLeader,
    ClosedLeader,
    ShortFollower,
    LongFollower,
    PotentialFollower,
    Follower,
    Merging,
};

std::string_view to_string(RoleTag tag) noexcept;

struct Role {
    RoleTag tag = RoleTag::Undecided;
    LeaderRef leader;  // PotentialFollower / Follower

    friend bool operator==(const Role&, const Role&) = default;
};

enum class MergeStage : std::uint8_t {
    None,
    Prepared,   // Prep wave passed; structure of the old cluster intact
    Resolving,  // waiting for the counterpart at the same vid
    Resolved,   // survived resolution, children not all done
    Done,       // subtree fully resolved
};

/// Phase of the cluster root's matching/merging program.
enum class RootPhase : std::uint8_t {
    Idle,
    LeadInform,
    LeadClose,
    LeadConnect,
    FollowInform,
    FollowPoll,
    FollowAnnounce,
    FollowAwait,
    MergePrep,
    MergeAwait,
    MergeResolve,
    MergeSettle,
};

std::string_view to_string(RootPhase phase) noexcept;

struct FollowerRef {
    NodeId cluster = kNone;  // the follower cluster id == host of its root

    friend bool operator==(const FollowerRef&, const FollowerRef&) = default;
    friend auto operator<=>(const FollowerRef&, const FollowerRef&) = default;
};

struct GuestNodeState {
    NodeId vid = 0;
    NodeId host = 0;
    NodeId cluster = 0;
    PfcState pfc;
    Role role;
    std::int32_t poll_cnt = 0;
    NodeId partner = kNone;
    std::optional<std::uint64_t> rs;

    // Leader-side bookkeeping for ConnectFollowers.
    std::vector<FollowerRef> adopted;

    // Merge bookkeeping.
    MergeStage stage = MergeStage::None;
    NodeId counterpart_host = kNone;
    HostList merged_hosts;
    std::int32_t merge_age = 0;
    std::vector<NodeId> child_hosts;  // hosts of the tree children, recorded by the Prep feedback
    std::vector<std::pair<NodeId, NodeId>> pending_links;  // child hosts to connect next round

    // Root program (meaningful on vid 0 only).
    RootPhase phase = RootPhase::Idle;
    std::int32_t phase_age = 0;
    bool wave_started = false;
    bool long_follower = false;
    LeaderRef chosen_leader;
    HostList members;  // published host list of the cluster while merging

    std::int32_t pfc_bad_rounds = 0;

    friend bool operator==(const GuestNodeState& a, const GuestNodeState& b);
};

/// One real node: its cluster pointers and the guest nodes it hosts (sorted by vid).
struct HostState {
    NodeId id = 0;
    NodeId cluster_succ = kNone;
    NodeId cluster_pred = kNone;
    std::int64_t last_reset_round = -2;
    std::vector<GuestNodeState> guests;

    [[nodiscard]] const GuestNodeState* find(NodeId vid) const;
    [[nodiscard]] GuestNodeState* find(NodeId vid);
    [[nodiscard]] bool any_merging() const;
    [[nodiscard]] NodeId cluster() const { return guests.empty() ? kNone : guests.front().cluster; }

    friend bool operator==(const HostState&, const HostState&) = default;
};

/// Fresh guest node of a singleton cluster hosted on `host`.
GuestNodeState clean_guest(NodeId vid, NodeId host);

/// Reset action: the host becomes a singleton cluster hosting every guest node.
/// Edges are left alone.
void reset(HostState& host, NodeId n, std::int64_t round);

/// Reset guard: a host may not reset in two consecutive rounds.
bool reset_allowed(const HostState& host, std::int64_t round) noexcept;

// ---------------------------------------------------------------------------
// Role selection

enum class RoleChoice : std::uint8_t { Leader, ShortFollower, LongFollower };

/// Leader with probability 1/2, otherwise short or long follower with 1/2 each.
RoleChoice role_select(std::mt19937_64& rng);

struct ProtocolConstants {
    std::int32_t short_polls = 2;
    std::int32_t long_polls = 12;
};

std::int32_t initial_poll_count(RoleChoice choice, const ProtocolConstants& k = {});

// ---------------------------------------------------------------------------
// ConnectFollowers

struct ConnectPlan {
    std::vector<std::pair<FollowerRef, FollowerRef>> pairs;
    std::optional<FollowerRef> leftover;  // forwarded to the parent, or matched with the leader at the root
};

/// Orders followers by cluster id and pairs neighbours; an odd one is left over.
ConnectPlan connect_followers(std::vector<FollowerRef> followers);


// ---------------------------------------------------------------------------
// ReplaceNode

/// One side of a counterpart pair at the same vid.
struct ReplaceSide {
    NodeId host = 0;
    NodeId cluster = 0;
    NodeId partner = kNone;
    std::optional<std::uint64_t> rs;
    NodeId succ = kNone;  // cluster pointers of the host before the merge
    NodeId pred = kNone;
    std::vector<NodeId> held;  // vids currently held by the host
};

enum class ReplaceAction : std::uint8_t {
    Abort,       // guard failed: both hosts reset
    Keep,        // c survives and its host keeps its pointers
    UpdateSucc,  // c survives, host_c now stops below a new successor
    UpdatePred,  // c survives, host_c gains a predecessor
    Splice,      // c is deleted; d adopts its children
};

struct ReplaceOutcome {
    ReplaceAction action = ReplaceAction::Abort;
    NodeId new_succ = kNone;
    NodeId new_pred = kNone;
    std::vector<NodeId> lost;  // vids of host_c that the merged embedding assigns elsewhere
};

/// Guard and pointer update for counterparts c and d at `vid`. `merged` is the
/// union host set; c survives iff its host owns `vid` under ranges(n, merged).
ReplaceOutcome replace_node(NodeId vid, const ReplaceSide& c, const ReplaceSide& d, std::uint64_t beacon,
                            const HostSet& merged);

bool merge_guard(const ReplaceSide& c, const ReplaceSide& d, std::uint64_t beacon);

// ---------------------------------------------------------------------------
// Local view and faults

struct GuestRef {
    const HostState* host = nullptr;
    const GuestNodeState* node = nullptr;
};

/// Read-only snapshot a host sees in one round: its own state, the digests of
/// adjacent hosts, and their adjacency lists.
struct LocalView {
    const HostState* self = nullptr;
    std::vector<const HostState*> neighbours;  // sorted by id
    const std::vector<std::vector<NodeId>>* adjacency = nullptr;  // indexed by host id
    const GuestGraph* graph = nullptr;
    const SpanningTree* tree = nullptr;
    std::vector<std::vector<GuestRef>> by_vid;  // guests in self + neighbours, self first

    [[nodiscard]] NodeId n() const { return graph->n; }
    [[nodiscard]] bool adjacent(NodeId host) const;
    /// Self or an adjacent host; nullptr otherwise.
    [[nodiscard]] const HostState* host(NodeId id) const;
    /// Some host adjacent to both a and b in the snapshot (smallest id), if any.
    [[nodiscard]] std::optional<NodeId> introducer(NodeId a, NodeId b) const;
    [[nodiscard]] bool linked(NodeId a, NodeId b) const;
};

LocalView make_view(const HostState& self, std::vector<const HostState*> neighbours,
                    const std::vector<std::vector<NodeId>>& adjacency, const GuestGraph& graph,
                    const SpanningTree& tree);

bool is_cluster_root(const GuestNodeState& node, NodeId host) noexcept;

/// The tree neighbour at `vid` that `node` talks to, per the merge-aware rules.
GuestRef tree_peer(const LocalView& view, const GuestNodeState& node, NodeId vid);

struct WatchdogLimits {
    std::int32_t wave = 0;           // one full PFC wave on the deepest tree
    std::int32_t phase = 0;          // ordinary root phases
    std::int32_t connect = 0;        // LeadConnect may block on followers
    std::int32_t follow_await = 0;   // give up waiting for a partner
    std::int32_t merge_await = 0;    // abandon a merge whose partner never gets ready
    std::int32_t merge_node = 0;     // reset a merging node stuck this long
};

WatchdogLimits watchdog_limits(std::int32_t tree_depth);

enum class FaultReason : std::uint8_t {
    None,
    EmptyHost,
    MixedPhases,
    RangeMismatch,
    PointerMismatch,
    ExtraEdge,
    ClusterId,
    TreeNeighbour,
    GuestNeighbour,
    PfcState,
    MergeState,
    RoleState,
    RootWatchdog,
    MergeWatchdog,
    PollCount,
    MergeGuard,
};

std::string_view to_string(FaultReason reason) noexcept;

/// Host-wide checks.
FaultReason detect_host_fault(const LocalView& view, const WatchdogLimits& limits);

/// Checks one guest node of view.self against the snapshot.
FaultReason detect_reset_fault(const LocalView& view, const GuestNodeState& node, const WatchdogLimits& limits);

/// True iff every (parent, node) and (node, child) PFC pair is reachable.
bool pfc_locally_legal(const LocalView& view, const GuestNodeState& node);

// ---------------------------------------------------------------------------
// One round of one host

struct EdgeOp {
    NodeId a = 0;
    NodeId b = 0;
    NodeId actor = 0;
    bool create = true;
    bool protocol_only = false;  // deletions: only remove protocol-created edges
};

enum class MsgKind : std::uint8_t { AssignPartner, AdoptFollower, ResolveNext };

struct Message {
    MsgKind kind = MsgKind::AssignPartner;
    NodeId from_host = 0;
    NodeId to_host = 0;
    NodeId to_vid = 0;
    NodeId value = kNone;
    HostList hosts;

    friend bool operator==(const Message& a, const Message& b);
};

struct StepContext {
    const LocalView* view = nullptr;
    std::int64_t round = 0;
    std::uint64_t beacon = 0;
    ProtocolConstants constants;
    WatchdogLimits limits;
    std::mt19937_64* rng = nullptr;
};

struct HostStepResult {
    bool reset = false;
    FaultReason fault = FaultReason::None;
    std::int32_t merges_completed = 0;
    std::vector<EdgeOp> edges;
    std::vector<Message> messages;
};

/// Computes the next state of view.self. `next` must start as a copy of *view.self.
HostStepResult host_step(const StepContext& ctx, std::span<const Message> inbox, HostState& next);

}  // namespace avatar
