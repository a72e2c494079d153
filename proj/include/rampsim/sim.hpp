#pragma once

#include <array>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "rampsim/allocation.hpp"
#include "rampsim/beta.hpp"

namespace rampsim {

struct SimConfig {
    ClusterConfig cluster;
    AllocationConfig allocation;  // partition.max_degree is forced to N_W / 2
    double inter_arrival = 1000.0;  // seconds
    int num_iterations = 50;
    double max_wallclock = 1e6;  // seconds
    BetaSpec beta = BetaSpec::preset("A");
    std::uint64_t seed = 0;

    void validate() const;
    int max_action() const { return cluster.shape.num_workers() / 2; }
};

/// A SimConfig together with the job types it samples from.
struct EpisodeConfig {
    SimConfig sim;
    JobCatalog catalog;
};

/// Reads `cluster`, `sim`, `beta`/`beta_point` and `profile` records.
/// Profile paths are resolved against the config file's directory.
EpisodeConfig load_episode_config(const std::string& path);
EpisodeConfig episode_config_from_records(const std::vector<Record>& records, const std::string& base_dir);
/// Applies `key=value` overrides from one record onto a SimConfig
/// (seed, inter_arrival, num_iterations, max_wallclock, quantum, beta).
void apply_overrides(SimConfig& cfg, const Record& overrides);

constexpr std::size_t kNumBlockReasons = 4;
/// Index of a blocking reason in EpisodeMetrics::blocked_by_reason.
std::size_t reason_index(BlockReason r);
BlockReason reason_at(std::size_t i);

struct JobTypeMetrics {
    std::string model_name;
    std::int64_t arrived = 0;
    std::int64_t accepted = 0;
    std::int64_t blocked = 0;
    double blocking_rate() const { return arrived ? static_cast<double>(blocked) / static_cast<double>(arrived) : 0.0; }
    bool operator==(const JobTypeMetrics&) const = default;
};

struct EpisodeMetrics {
    std::uint64_t seed = 0;
    std::int64_t jobs_arrived = 0;
    std::int64_t jobs_accepted = 0;
    std::int64_t jobs_blocked = 0;
    std::array<std::int64_t, kNumBlockReasons> blocked_by_reason{};
    std::int64_t accepted_unsplit = 0;  // accepted with u = 1
    double offered_bytes = 0.0;         // job_info_size * N_iter over accepted jobs
    double cluster_bytes = 0.0;         // partitioned_info_size * N_iter over accepted jobs
    double elapsed = 0.0;               // seconds of wall clock covered
    double total_jct = 0.0;             // seconds, accepted jobs
    double total_speedup = 0.0;
    double episode_return = 0.0;
    std::vector<JobTypeMetrics> per_type;

    double blocking_rate() const;
    double offered_throughput() const;
    double cluster_throughput() const;
    double mean_jct() const;
    double mean_speedup() const;

    Record to_record() const;
    /// Per-type rows as `job_type` records.
    std::vector<Record> type_records() const;
    static EpisodeMetrics from_records(const Record& summary, const std::vector<Record>& types = {});
    bool operator==(const EpisodeMetrics&) const = default;
};

struct StepOutcome {
    double reward = 0.0;
    AdmissionResult admission;
    JobId job_id = 0;
};

/// Time-driven between decisions, event-driven inside them: the wall clock
/// jumps from one arrival to the next, releasing finished jobs on the way.
class Simulator {
public:
    Simulator(SimConfig cfg, JobCatalog catalog);

    const SimConfig& config() const { return cfg_; }
    const JobCatalog& catalog() const { return catalog_; }
    const ClusterState& cluster() const { return cluster_; }
    Nanos now() const { return now_; }
    bool done() const { return done_; }
    /// The job awaiting a decision; null when done or after apply_action.
    const JobRequest* pending() const { return pending_ ? &*pending_ : nullptr; }
    std::int64_t decision_index() const { return decisions_; }
    const EpisodeMetrics& metrics() const { return metrics_; }

    /// Advances to the next arrival, or to the horizon (setting done).
    /// Returns false when the episode is over.
    bool next_decision();
    /// Resolves the pending job. Throws std::logic_error without one and
    /// std::invalid_argument for u outside [0, N_W / 2].
    StepOutcome apply_action(int u);

private:
    void release_until(Nanos t);

    SimConfig cfg_;
    JobCatalog catalog_;
    ClusterState cluster_;
    Rng rng_;
    Nanos now_{0};
    Nanos horizon_{0};
    Nanos inter_arrival_{0};
    std::int64_t arrivals_ = 0;
    std::int64_t decisions_ = 0;
    bool done_ = false;
    std::optional<JobRequest> pending_;
    using Completion = std::pair<Nanos, JobId>;
    std::priority_queue<Completion, std::vector<Completion>, std::greater<>> running_;
    EpisodeMetrics metrics_;
};

}  // namespace rampsim
