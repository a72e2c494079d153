#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rampsim/sim.hpp"

namespace rampsim {

class EnvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr int kOpFeatures = 5;
constexpr int kDepFeatures = 2;
constexpr int kGlobalJobFeatures = 15;
constexpr int kGlobalClusterFeatures = 2;

/// Positions in Observation::global_job.
enum GlobalJobFeature : int {
    gj_num_ops,
    gj_num_deps,
    gj_sequential_jct,
    gj_max_acceptable_jct,
    gj_beta_raw,
    gj_beta,
    gj_total_memory,
    gj_total_dep_size,
    gj_num_iterations,
    gj_mean_compute,
    gj_median_compute,
    gj_mean_memory,
    gj_median_memory,
    gj_mean_dep_size,
    gj_median_dep_size,
};

struct Observation {
    Eigen::MatrixXd op_features;   // |O| x 5: compute, is-max compute, memory, is-max memory, depth
    Eigen::MatrixXd dep_features;  // |D| x 2: size, is-largest
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, 2> edge_list;  // (parent, child) op indices
    Eigen::VectorXd global_job;      // 15
    Eigen::VectorXd global_cluster;  // 2: occupied workers, running jobs (both / N_W)
    std::vector<std::uint8_t> action_mask;  // entry u-1 for u = 1..N_W/2
    std::int64_t decision_index = 0;

    bool mask_allows(int u) const { return u >= 1 && u <= static_cast<int>(action_mask.size()) && action_mask[u - 1]; }
    bool operator==(const Observation& o) const;
};

/// Catalog-wide maxima dividing the global job features; fixed at reset.
struct FeatureNormalisers {
    std::array<double, kGlobalJobFeatures> global_job{};
};

FeatureNormalisers catalog_normalisers(const JobCatalog& catalog, const SimConfig& cfg);

std::vector<std::uint8_t> action_mask(const Simulator& sim);
/// Requires a pending job.
Observation observe(const Simulator& sim, const FeatureNormalisers& norm);

struct StepInfo {
    int action = 0;
    bool accepted = false;
    BlockReason reason = BlockReason::none;
    std::string detail;
    double jct = 0.0;      // seconds, all iterations; 0 when no estimate was made
    double jct_seq = 0.0;  // seconds, all iterations
    std::vector<std::uint8_t> next_mask;
};

struct Transition {
    std::optional<Observation> observation;  // empty once done
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// Reset/step interface over one Simulator. Invalid but in-range actions are
/// accepted and punished; out-of-range actions and stepping a finished
/// episode raise EnvError.
class Env {
public:
    explicit Env(EpisodeConfig base);

    int action_count() const { return base_.sim.max_action() + 1; }
    const RampShape& shape() const { return base_.sim.cluster.shape; }

    /// Overrides are `sim`-record style settings (see apply_overrides).
    Observation reset(std::uint64_t seed, const Record* overrides = nullptr);
    Transition step(int action);
    bool done() const;
    const EpisodeMetrics& metrics() const;
    const Simulator& simulator() const;

private:
    EpisodeConfig base_;
    std::optional<Simulator> sim_;
    FeatureNormalisers norm_;
};

using Policy = std::function<int(const Observation&)>;

/// Drives a Simulator directly with a policy until the horizon.
EpisodeMetrics run_episode(const SimConfig& cfg, const JobCatalog& catalog, const Policy& policy);

}  // namespace rampsim
