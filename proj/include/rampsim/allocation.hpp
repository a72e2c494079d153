#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rampsim/partition.hpp"
#include "rampsim/topology.hpp"

namespace rampsim {

struct AllocationConfig {
    PartitionConfig partition;
    CollectiveModel collective = collective_time;
};

/// A remote edge's light path: worker sequence and the channel it holds on
/// every link of that sequence.
struct EdgeRoute {
    Path path;
    int channel = 0;
    int hops() const { return static_cast<int>(path.size()) - 1; }
};

struct Placement {
    std::vector<WorkerSet> op_workers;            // per op index; shard i on op_workers[op][i]
    std::vector<WorkerId> sub_op_worker;          // per sub-op
    std::vector<std::optional<EdgeRoute>> route;  // per edge; empty for co-located or empty edges
    std::vector<std::pair<WorkerId, double>> memory;  // resident shard bytes per used worker, ascending
    std::vector<ChannelKey> channels;                 // distinct (link, channel) slots, ascending

    std::vector<WorkerId> workers() const;
};

struct PlacementFailure {
    std::size_t op = 0;  // first op index that could not be placed
    std::string detail;
};

struct PlacementResult {
    std::optional<Placement> placement;
    std::optional<PlacementFailure> failure;
};

/// First-fit placement. Ops go in topological order: onto a parent's worker
/// set when it has exactly k_o workers with room, otherwise onto the first
/// free symmetric set. Remote edges then take the first path with a channel
/// free on all of its links.
PlacementResult place_operations(const PartitionedJobGraph& pg, const ClusterState& cluster);

struct Schedule {
    std::vector<Nanos> sub_op_start, sub_op_end;
    std::vector<Nanos> edge_start, edge_end;  // collectives carry the op's collective window
    std::vector<std::optional<Nanos>> collective_end;  // per op, when split
    Nanos makespan{0};
};

struct JctEstimate {
    Nanos makespan{0};  // one iteration
    Nanos jct{0};       // makespan * num_iterations
    Nanos compute_critical_path{0};
    double network_overhead_fraction = 0.0;

    double jct_seconds() const { return to_seconds(jct); }
};

/// Event-accurate run of one iteration on reserved resources. Workers and
/// channels each serve their ready queue by shortest remaining time, ties by
/// ascending id.
JctEstimate schedule_and_estimate(const PartitionedJobGraph& pg, const Placement& placement, int num_iterations,
                                  const CommConfig& comm, const CollectiveModel& collective,
                                  Schedule* schedule_out = nullptr);

/// Longest path through the sub-op DAG counting compute only.
Nanos compute_critical_path(const PartitionedJobGraph& pg);

enum class BlockReason { none, user_rejection, deadline, resources, invalid_action };
const char* to_string(BlockReason r);
BlockReason parse_block_reason(std::string_view s);

struct ActionCheck {
    bool valid = false;
    std::string reason;  // empty when valid
};

/// Validity of a nonzero action: 1 or even, no more than the free worker
/// count, and every distinct shard count of the partition has a symmetric
/// set with room for its largest shard.
ActionCheck action_validity(const JobGraph& job, int u, const ClusterState& cluster, const PartitionConfig& cfg);

struct AdmissionResult {
    bool accepted = false;
    BlockReason reason = BlockReason::none;
    std::string detail;
    int degree = 0;
    std::optional<JctEstimate> estimate;
    double partitioned_info_size = 0.0;
    Nanos completion{0};  // now + jct when accepted
};

/// Partitions, places and schedules a job at degree u. An accepted job holds
/// its resources on the cluster under `id` over [now, now + jct]; a blocked
/// job holds nothing. Throws std::invalid_argument for u outside [0, N_W / 2].
AdmissionResult admit(const JobRequest& job, int u, ClusterState& cluster, const AllocationConfig& cfg, Nanos now,
                      JobId id);

/// Deadline test in integer ticks: makespan <= beta * JCT^seq.
bool meets_deadline(const JobRequest& job, Nanos makespan);

/// Time-ordered trace of a schedule: one record per start/end event.
void write_schedule_trace(std::ostream& out, const PartitionedJobGraph& pg, const Placement& placement,
                          const Schedule& schedule);

}  // namespace rampsim
