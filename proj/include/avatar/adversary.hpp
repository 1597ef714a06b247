#pragma once

#include "avatar/engine.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace avatar {

class ScenarioError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Named initial configurations. "random" is gen_random at the requested corruption level.
std::vector<std::string> scenario_names();

struct ScenarioOptions {
    double corruption = 0.5;  // only used by "random"
    EngineConfig engine;
};

/// Random weakly connected graph over `hosts`. Hosts fall into random proper
/// clusters of 2-4 members with probability `level`, the rest are reset
/// singletons; every mutable field is then forged with probability `level`.
World gen_random(const TopologySpec& spec, const HostSet& hosts, std::uint64_t seed, double level,
                 const EngineConfig& config = {});

/// Host set a scenario runs on. chord-worst-range and forged-merge-rs fix their own.
HostSet scenario_hosts(std::string_view name, const TopologySpec& spec, const HostSet& requested);

/// Builds the named scenario. Throws ScenarioError for an unknown name and
/// std::invalid_argument when the initial host graph would be disconnected.
World gen_scenario(std::string_view name, const TopologySpec& spec, const HostSet& hosts, std::uint64_t seed,
                   const ScenarioOptions& options = {});

/// Same as gen_scenario; the engine-facing name.
World init_world(const TopologySpec& spec, const HostSet& hosts, std::string_view scenario, std::uint64_t seed,
                 const ScenarioOptions& options = {});

/// Installs a proper clean cluster over `members`: ranges, pointers, cluster
/// id and Avatar edges (raw).
void plant_cluster(World& world, const std::vector<NodeId>& members, std::optional<std::uint64_t> rs);

}  // namespace avatar
