#pragma once

// RAMP cluster model.
//
// A worker sits at (c, r, s): communication group c, rack r, server slot s.
// Rack r hosts N_S servers from every communication group, so one rack spans
// up to N_C groups. Workers are numbered c-major: ((c * N_R) + r) * N_S + s,
// which is also the first-fit scan order.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rampsim/job_graph.hpp"

namespace rampsim {

class Record;

using WorkerId = int;
using JobId = std::int64_t;
using WorkerSet = std::vector<WorkerId>;

struct RampShape {
    int n_c = 4;  // communication groups
    int n_r = 4;  // racks per communication group
    int n_s = 2;  // servers per rack

    int num_workers() const { return n_c * n_r * n_s; }
    void validate() const;
    bool operator==(const RampShape&) const = default;
};

struct WorkerCoord {
    int c = 0;
    int r = 0;
    int s = 0;
    auto operator<=>(const WorkerCoord&) const = default;
};

WorkerId worker_id(const WorkerCoord& w, const RampShape& shape);
WorkerCoord worker_coord(WorkerId id, const RampShape& shape);

// Symmetry rules -------------------------------------------------------------

enum class SymmetryRule : std::uint8_t {
    none,
    singleton,
    multi_rack,    // rule 1: equal count S >= 2 per rack over R >= 2 racks, each rack spanning >= R groups
    single_rack,   // rule 2: all workers on one rack, all groups distinct
    one_per_rack,  // rule 3: one worker on each rack, all groups distinct
};

const char* to_string(SymmetryRule r);

struct SymmetryVerdict {
    bool symmetric = false;
    SymmetryRule rule = SymmetryRule::none;
};

/// Throws std::out_of_range for coordinates outside the shape and
/// std::invalid_argument for an empty set. Repeated workers are not symmetric.
SymmetryVerdict is_symmetric(std::span<const WorkerCoord> set, const RampShape& shape);
SymmetryVerdict is_symmetric_ids(std::span<const WorkerId> set, const RampShape& shape);

/// Lexicographically first (by sorted worker id) symmetric set of n workers
/// among those with free_memory[w] >= mem_per_worker. Unavailable workers
/// carry a negative free_memory.
std::optional<WorkerSet> find_symmetric_set(int n, const RampShape& shape, std::span<const double> free_memory,
                                            double mem_per_worker);

/// Set sizes for which some symmetric shape exists on an empty cluster.
bool shape_admits_size(const RampShape& shape, int n);

// Paths ----------------------------------------------------------------------

using Path = std::vector<WorkerId>;

/// Up to k loop-free paths from src to dst over the fully connected worker
/// fabric, ordered by (hop count, lexicographic worker sequence).
std::vector<Path> k_shortest_paths(WorkerId src, WorkerId dst, int k, const RampShape& shape);

// Communication model ----------------------------------------------------------

struct CommConfig {
    double total_node_bandwidth = 1.6e12;       // B/s per worker
    double per_transceiver_bandwidth = 4.0e11;  // total / N_C
    double propagation_latency = 50e-9;
    double ocs_reconfig_latency = 1e-9;
    double io_latency = 100e-9;
    int channels_per_link = 4;

    static CommConfig for_shape(const RampShape& shape, double total_node_bandwidth = 1.6e12);
    void validate(const RampShape& shape) const;
};

/// Point-to-point time: zero for an empty payload, otherwise the fixed
/// latencies plus serialisation at the per-transceiver rate.
double transfer_time(double size, const CommConfig& cfg);
/// Multi-hop relay: each extra hop adds propagation and I/O latency.
double path_transfer_time(double size, int hops, const CommConfig& cfg);

/// Default collective model: one gather and one scatter step, independent of
/// the participant count. Throws std::invalid_argument for fewer than two.
double collective_time(int participants, double per_member_size, const CommConfig& cfg);

using CollectiveModel = std::function<double(int participants, double per_member_size, const CommConfig&)>;

// Cluster --------------------------------------------------------------------

struct ClusterConfig {
    RampShape shape;
    double memory_capacity = 80e9;  // bytes per worker
    double flops = 130e12;          // carried for reporting; compute times are used as profiled
    CommConfig comm;
    int k_paths = 2;

    void validate() const;
    Record to_record() const;
    static ClusterConfig from_record(const Record& r);
};

ClusterConfig load_cluster_config(const std::string& path);

/// A (directed link, channel) slot on the optical fabric.
struct ChannelKey {
    WorkerId src = 0;
    WorkerId dst = 0;
    int channel = 0;
    auto operator<=>(const ChannelKey&) const = default;
};

struct Reservation {
    JobId job = 0;
    std::vector<std::pair<WorkerId, double>> memory;  // worker, bytes
    std::vector<ChannelKey> channels;
    Nanos start{0};
    Nanos end{0};
};

/// Workers, memory and channels with exclusive per-job reservations.
class ClusterState {
public:
    explicit ClusterState(ClusterConfig cfg);

    const ClusterConfig& config() const { return cfg_; }
    const RampShape& shape() const { return cfg_.shape; }
    int num_workers() const { return cfg_.shape.num_workers(); }

    std::optional<JobId> worker_owner(WorkerId w) const { return owner_[static_cast<std::size_t>(w)]; }
    double memory_used(WorkerId w) const { return memory_used_[static_cast<std::size_t>(w)]; }
    double free_memory(WorkerId w) const { return cfg_.memory_capacity - memory_used(w); }
    /// Free memory per worker, negative for workers reserved by a job.
    std::vector<double> free_memory_view() const;

    std::optional<JobId> channel_owner(const ChannelKey& key) const;
    bool channel_free(const ChannelKey& key) const { return !channel_owner(key).has_value(); }

    int free_workers() const;
    int occupied_workers() const { return num_workers() - free_workers(); }
    std::size_t running_jobs() const { return reservations_.size(); }
    const std::vector<Reservation>& reservations() const { return reservations_; }

    /// Throws std::logic_error if any resource is already held or memory overflows.
    void reserve(Reservation r);
    /// Returns the released reservation. Throws std::out_of_range if unknown.
    Reservation release(JobId job);

private:
    std::size_t channel_index(const ChannelKey& key) const;

    ClusterConfig cfg_;
    std::vector<std::optional<JobId>> owner_;
    std::vector<double> memory_used_;
    std::vector<std::optional<JobId>> channel_owner_;
    std::vector<Reservation> reservations_;
};

}  // namespace rampsim
