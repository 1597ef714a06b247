#pragma once

#include "avatar/embedding.hpp"
#include "avatar/metrics.hpp"
#include "avatar/protocol.hpp"
#include "avatar/topology.hpp"
#include "avatar/trace.hpp"

#include <map>
#include <random>
#include <stdexcept>
#include <vector>

namespace avatar {

/// Raised when the simulator would break a model rule (un-introduced edge,
/// message over a missing edge). Never caught by the engine itself.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class EdgeTag : std::uint8_t { Raw, Protocol };

struct EngineConfig {
    ProtocolConstants constants;
    std::int32_t rs_bits = 0;  // 0 selects 2*ceil(log2 N)
};

struct World {
    TopologySpec spec;
    GuestGraph graph;
    SpanningTree tree;
    std::int32_t diameter = 0;
    std::int32_t tree_depth = 0;
    HostSet hosts;
    std::vector<Edge> target_edges;  // Avatar(N, V)
    RangeMap target_ranges;

    std::vector<HostState> states;  // one per host, ascending id
    std::vector<std::int32_t> index_of;  // host id -> position in states, -1 if not a host
    std::map<Edge, EdgeTag> edges;
    std::vector<Message> inflight;

    std::int64_t round = 0;
    std::uint64_t seed = 0;
    std::int32_t rs_bits = 0;
    std::uint64_t beacon = 0;  // the shared random sequence L
    ProtocolConstants constants;
    WatchdogLimits limits;
    std::vector<std::mt19937_64> rngs;

    [[nodiscard]] const HostState& state(NodeId host) const;
    [[nodiscard]] HostState& state(NodeId host);

    void add_edge(NodeId a, NodeId b, EdgeTag tag = EdgeTag::Raw);
    [[nodiscard]] std::vector<Edge> edge_list() const;
    [[nodiscard]] std::vector<std::vector<NodeId>> adjacency() const;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// World over (spec, hosts) with every host a reset singleton and no edges.
World make_world(const TopologySpec& spec, const HostSet& hosts, std::uint64_t seed, const EngineConfig& config = {});

struct StepStats {
    std::int32_t resets = 0;
    std::int32_t merges = 0;
    std::vector<std::pair<NodeId, FaultReason>> faults;  // hosts that reset this round
};

/// One synchronous round. Throws InvariantViolation on a model-rule breach.
StepStats step(World& world);

bool is_legal(const World& world);
bool weakly_connected(const World& world);
TraceRecord observe(const World& world, const StepStats& stats);

struct RunOptions {
    std::int64_t max_rounds = 1000;
    std::int64_t closure_window = -1;  // -1 selects 10*D
};

struct RunResult {
    std::vector<TraceRecord> trace;
    RunMetrics metrics;
    bool converged = false;  // legal and stayed legal for the closure window
    bool disconnected = false;
    std::int64_t closure_window = 0;
    World final_world;
};

/// Steps until legality has held for the closure window. A legal streak that
/// starts before max_rounds is followed to the end of its window.
RunResult run(World world, const RunOptions& options);

std::int64_t default_round_budget(const World& world);

}  // namespace avatar
