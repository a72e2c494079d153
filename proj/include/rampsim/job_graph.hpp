#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rampsim/rng.hpp"

namespace rampsim {

/// Simulation time. Integer nanoseconds keep lookahead and realised
/// completion times bit-identical and make deadline comparisons exact.
using Nanos = std::chrono::nanoseconds;

Nanos to_nanos(double seconds);
double to_seconds(Nanos t);

class JobGraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Operation {
    std::int64_t op_id = 0;
    double compute_time = 0.0;  // seconds, one training iteration (forward + backward)
    double memory = 0.0;        // bytes
    int depth = 0;              // hops from a source; filled in by JobGraph
};

struct Dependency {
    std::int64_t dep_id = 0;
    std::int64_t parent_op = 0;
    std::int64_t child_op = 0;
    double size = 0.0;  // bytes; 0 marks a control dependency
};

/// Immutable operation/dependency DAG of one training iteration.
class JobGraph {
public:
    /// Validates and indexes the graph. Throws JobGraphError naming the
    /// offending element on duplicate ids, dangling endpoints, self loops,
    /// negative costs or cycles.
    JobGraph(std::string model_name, std::vector<Operation> ops, std::vector<Dependency> deps);

    const std::string& model_name() const { return model_name_; }
    const std::vector<Operation>& ops() const { return ops_; }
    const std::vector<Dependency>& deps() const { return deps_; }
    std::size_t num_ops() const { return ops_.size(); }
    std::size_t num_deps() const { return deps_.size(); }

    /// Sum of op compute times: the single-device serial run time.
    double sequential_jct() const { return sequential_jct_; }
    /// Same quantity in simulator ticks (sum of per-op rounded ticks).
    Nanos sequential_ticks() const { return sequential_ticks_; }
    int max_depth() const { return max_depth_; }

    std::size_t op_index(std::int64_t op_id) const;
    std::size_t parent_index(std::size_t dep) const { return dep_parent_[dep]; }
    std::size_t child_index(std::size_t dep) const { return dep_child_[dep]; }
    /// Dependency indices entering / leaving op index i, ascending.
    const std::vector<std::size_t>& in_deps(std::size_t i) const { return in_deps_[i]; }
    const std::vector<std::size_t>& out_deps(std::size_t i) const { return out_deps_[i]; }
    /// Op indices in topological order (Kahn, ties by ascending index).
    const std::vector<std::size_t>& topo_order() const { return topo_; }

private:
    std::string model_name_;
    std::vector<Operation> ops_;
    std::vector<Dependency> deps_;
    std::vector<std::size_t> dep_parent_, dep_child_;
    std::vector<std::vector<std::size_t>> in_deps_, out_deps_;
    std::vector<std::size_t> topo_;
    std::vector<std::pair<std::int64_t, std::size_t>> id_index_;  // sorted by id
    double sequential_jct_ = 0.0;
    Nanos sequential_ticks_{0};
    int max_depth_ = 0;
};

using JobGraphPtr = std::shared_ptr<const JobGraph>;

// Profile files ------------------------------------------------------------

JobGraph read_profile(std::istream& in);
JobGraph load_profile(const std::string& path);
void write_profile(std::ostream& out, const JobGraph& job);
void save_profile(const std::string& path, const JobGraph& job);

// Aggregates ---------------------------------------------------------------

/// Sum of op memory and dependency sizes in bytes.
double job_info_size(const JobGraph& job);

struct JobStats {
    std::size_t num_ops = 0;
    std::size_t num_deps = 0;
    int max_depth = 0;
    double total_compute = 0, mean_compute = 0, median_compute = 0, max_compute = 0;
    double total_memory = 0, mean_memory = 0, median_memory = 0, max_memory = 0;
    double total_dep_size = 0, mean_dep_size = 0, median_dep_size = 0, max_dep_size = 0;
};

JobStats job_stats(const JobGraph& job);

/// Median with the even-length convention (mean of the two central values);
/// 0 for an empty list.
double median(std::vector<double> values);

// Requests and catalogs ----------------------------------------------------

/// One arriving job. beta is held in hundredths so deadlines compare exactly.
struct JobRequest {
    JobGraphPtr job;
    std::size_t job_type = 0;  // index into the catalog
    int beta_hundredths = 100;
    int num_iterations = 1;
    Nanos arrival{0};

    double beta() const { return beta_hundredths / 100.0; }
    double max_acceptable_jct() const;
};

struct JobCatalog {
    std::vector<JobGraphPtr> profiles;
    std::vector<double> weights;

    /// Throws std::invalid_argument when empty or weights are malformed.
    void validate() const;
    static JobCatalog uniform(std::vector<JobGraphPtr> profiles);
};

// Synthetic profiles -------------------------------------------------------

/// Aggregate targets for a generated profile. Totals and maxima are hit
/// exactly (compute at microsecond resolution, sizes in whole bytes).
struct ProfileTargets {
    std::string model_name = "synthetic";
    std::size_t num_ops = 1;
    std::size_t num_deps = 0;
    int depth = 0;
    double total_compute = 1.0;
    double max_compute = 1.0;
    double total_memory = 0.0;
    double max_memory = 0.0;
    double total_dep_size = 0.0;
    double max_dep_size = 0.0;
};

/// Layered random DAG with exactly the requested op count, dependency count
/// and depth. Deterministic for a fixed seed. Throws std::invalid_argument
/// for infeasible targets.
JobGraph generate_synthetic_profile(const ProfileTargets& targets, std::uint64_t seed);

/// Targets shaped after the five reference deep-learning jobs.
std::vector<ProfileTargets> reference_profile_targets();

}  // namespace rampsim
