#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "rampsim/job_graph.hpp"

namespace rampsim {

struct PartitionConfig {
    double quantum = 0.01;  // minimum shard compute time, seconds
    int max_degree = 16;    // environment maximum, N_W / 2

    void validate() const;
};

/// Valid per-op shard counts are 1 and the even numbers.
constexpr bool is_valid_degree(int k) { return k == 1 || (k >= 2 && k % 2 == 0); }

/// Largest valid shard count k <= min(degree, floor(compute_time / quantum)),
/// never below 1.
int max_splits(double compute_time, double quantum, int degree);

enum class Pass : std::uint8_t { forward, backward };
enum class EdgeKind : std::uint8_t { data, gradient, collective };

const char* to_string(Pass p);
const char* to_string(EdgeKind k);

/// One pass of one shard of an original operation.
///
/// compute_time and memory describe the whole shard (1/k of the op, forward
/// plus backward). duration is the time this pass occupies its worker: the
/// shard's ticks are split evenly, forward taking the floor half.
struct SubOperation {
    std::size_t op = 0;
    int shard = 0;
    Pass pass = Pass::forward;
    double compute_time = 0.0;
    double memory = 0.0;
    Nanos duration{0};
};

struct PartitionedEdge {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    double size = 0.0;
    EdgeKind kind = EdgeKind::data;
    std::uint32_t dep = 0;  // originating dependency (data/gradient) or op (collective)
};

/// Shard-to-shard pieces of one dependency: (parent shard, child shard, bytes).
struct ShardTransfer {
    int parent_shard;
    int child_shard;
    double size;
};
using ReplicationRule = std::function<std::vector<ShardTransfer>(double size, int parent_k, int child_k)>;

/// Every child shard receives the full tensor, assembled from all parent
/// shards: parent_k * child_k pieces of size / parent_k.
std::vector<ShardTransfer> replicate_all_to_all(double size, int parent_k, int child_k);
/// Alternative rule: child shard j reads only from parent shard j % parent_k,
/// receiving size / parent_k. Kept for comparison tests.
std::vector<ShardTransfer> replicate_matched(double size, int parent_k, int child_k);

/// Forward/backward expansion of a job at a given partition degree.
///
/// Sub-op ids: forward passes first (op index major, shard minor), then the
/// backward passes in the same layout. A backward pass always follows its own
/// forward pass on the same worker; that link is implicit and carries no bytes.
/// Collective edges model weight synchronisation among an op's backward
/// shards. They are traffic, not precedence: they run once every backward
/// shard of the op has finished.
class PartitionedJobGraph {
public:
    PartitionedJobGraph(JobGraphPtr origin, int degree, const PartitionConfig& cfg,
                        const ReplicationRule& rule = replicate_all_to_all);

    const JobGraph& origin() const { return *origin_; }
    const JobGraphPtr& origin_ptr() const { return origin_; }
    int degree() const { return degree_; }
    int shards(std::size_t op) const { return shards_[op]; }
    const std::vector<int>& shard_counts() const { return shards_; }
    const std::vector<SubOperation>& sub_ops() const { return sub_ops_; }
    const std::vector<PartitionedEdge>& edges() const { return edges_; }

    std::uint32_t forward_id(std::size_t op, int shard) const { return first_[op] + static_cast<std::uint32_t>(shard); }
    std::uint32_t backward_id(std::size_t op, int shard) const { return backward_offset_ + forward_id(op, shard); }
    std::uint32_t twin(std::uint32_t sub_op) const {
        return sub_op >= backward_offset_ ? sub_op - backward_offset_ : sub_op + backward_offset_;
    }
    std::size_t num_forward() const { return backward_offset_; }

    /// Precedence edges (data and gradient) leaving / entering a sub-op.
    const std::vector<std::uint32_t>& out_edges(std::uint32_t sub_op) const { return out_[sub_op]; }
    const std::vector<std::uint32_t>& in_edges(std::uint32_t sub_op) const { return in_[sub_op]; }
    /// Collective edges per op (empty when the op is not split).
    const std::vector<std::uint32_t>& collective_edges(std::size_t op) const { return collectives_[op]; }

private:
    JobGraphPtr origin_;
    int degree_ = 1;
    std::vector<int> shards_;
    std::vector<std::uint32_t> first_;
    std::uint32_t backward_offset_ = 0;
    std::vector<SubOperation> sub_ops_;
    std::vector<PartitionedEdge> edges_;
    std::vector<std::vector<std::uint32_t>> out_, in_, collectives_;
};

/// Throws std::invalid_argument when degree is outside [1, cfg.max_degree].
PartitionedJobGraph partition_job(const JobRequest& request, int degree, const PartitionConfig& cfg);
PartitionedJobGraph partition_job(JobGraphPtr job, int degree, const PartitionConfig& cfg);

/// Per-op shard counts without building the expanded graph.
std::vector<int> shard_counts(const JobGraph& job, int degree, const PartitionConfig& cfg);

/// Shard memory plus the bytes on every data, gradient and collective edge.
double partitioned_info_size(const PartitionedJobGraph& pg);

void write_partitioned(std::ostream& out, const PartitionedJobGraph& pg);

}  // namespace rampsim
