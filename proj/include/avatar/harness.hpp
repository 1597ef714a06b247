#pragma once

#include "avatar/adversary.hpp"
#include "avatar/engine.hpp"
#include "avatar/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace avatar {

/// One family swept over several N. SkipChord without an explicit skip uses s = log2 N.
struct SweepConfig {
    TopologyKind kind = TopologyKind::Linear;
    std::optional<NodeId> skip;
    std::vector<NodeId> n_list;
    std::vector<std::uint64_t> seeds;
    std::string scenario = "singleton-line";
    double corruption = 0.5;
    EngineConfig engine;
    // Hosts per run: all of [N] when unset, otherwise a seeded random subset of this size.
    std::optional<NodeId> host_count;
    std::optional<std::int64_t> max_rounds;  // default_round_budget when unset
    unsigned threads = 0;                    // 0 = hardware concurrency
};

struct RunRow {
    TopologyKind kind = TopologyKind::Linear;
    NodeId n = 0;
    std::optional<NodeId> skip;
    std::uint64_t seed = 0;
    std::string scenario;
    bool converged = false;
    std::optional<std::int64_t> rounds;
    std::int32_t peak_degree = 0;
    double degree_expansion = 0.0;
    bool disconnected = false;
    std::int64_t resets = 0;
};

struct SizeSummary {
    NodeId n = 0;
    std::int32_t runs = 0;
    std::int32_t converged = 0;
    std::int32_t disconnected = 0;
    std::int32_t diameter = 0;
    std::int32_t delta_hat = 0;  // exact for N <= 16, otherwise the upper bound
    std::optional<double> median_rounds;  // over converged runs
    std::optional<std::int64_t> max_rounds;
    std::optional<double> median_expansion;
    std::optional<double> max_expansion;
    std::int32_t max_peak_degree = 0;
    std::optional<double> c_time;  // median_rounds / (D * log2 N)
    std::optional<double> c_deg;   // median_expansion / (delta_hat * log2 N)
    double c_peak = 0.0;           // max peak degree / (delta_hat * log2 N)
};

struct SweepResult {
    std::vector<RunRow> rows;  // ordered by (n, seed)
    std::vector<SizeSummary> sizes;
};

TopologySpec sweep_spec(TopologyKind kind, NodeId n, std::optional<NodeId> skip);
HostSet random_hosts(NodeId n, NodeId count, std::uint64_t seed);

/// The maximum degree of embedding used to normalise degree measurements.
std::int32_t delta_hat(const GuestGraph& g);

RunRow run_row(const SweepConfig& config, NodeId n, std::uint64_t seed);
SweepResult sweep(const SweepConfig& config);
SizeSummary summarize(NodeId n, const TopologySpec& spec, const std::vector<RunRow>& rows);

double median(std::vector<double> values);

inline constexpr const char* kCsvHeader = "kind,n,s,seed,scenario,converged,rounds,peak_degree,degree_expansion";
std::string csv_row(const RunRow& row);

struct Table1Row {
    TopologyKind kind = TopologyKind::Linear;
    std::optional<NodeId> skip;
    TopologyMetrics metrics;
    std::string diameter_form;
    std::string delta_form;
};

/// Linear, Cbt, Chord and SkipChord(s = 2) at N. Exact maximum degree of
/// embedding for N <= 16, bounds otherwise.
std::vector<Table1Row> report_table1(NodeId n);

}  // namespace avatar
