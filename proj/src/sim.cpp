#include "rampsim/sim.hpp"

#include <filesystem>
#include <stdexcept>

#include "rampsim/text_record.hpp"

namespace rampsim {

void SimConfig::validate() const {
    cluster.validate();
    allocation.partition.validate();
    beta.validate();
    if (!(inter_arrival > 0.0)) throw std::invalid_argument("inter_arrival must be > 0");
    if (num_iterations < 1) throw std::invalid_argument("num_iterations must be >= 1");
    if (!(max_wallclock >= 0.0)) throw std::invalid_argument("max_wallclock must be >= 0");
    if (cluster.shape.num_workers() < 2) throw std::invalid_argument("cluster needs at least two workers");
}

void apply_overrides(SimConfig& cfg, const Record& r) {
    for (const auto& [key, value] : r.fields()) {
        if (key == "seed")
            cfg.seed = static_cast<std::uint64_t>(parse_int(value));
        else if (key == "inter_arrival")
            cfg.inter_arrival = parse_double(value);
        else if (key == "num_iterations")
            cfg.num_iterations = static_cast<int>(parse_int(value));
        else if (key == "max_wallclock")
            cfg.max_wallclock = parse_double(value);
        else if (key == "quantum")
            cfg.allocation.partition.quantum = parse_double(value);
        else if (key == "beta")
            cfg.beta = BetaSpec::preset(unescape_value(value));
        else
            throw ParseError("unknown setting '" + key + "'");
    }
}

EpisodeConfig episode_config_from_records(const std::vector<Record>& records, const std::string& base_dir) {
    EpisodeConfig out;
    std::vector<Record> beta_records;
    std::vector<JobGraphPtr> profiles;
    std::vector<double> weights;
    for (const auto& r : records) {
        if (r.kind() == "cluster") {
            out.sim.cluster = ClusterConfig::from_record(r);
        } else if (r.kind() == "sim") {
            apply_overrides(out.sim, r);
        } else if (r.kind() == "beta" || r.kind() == "beta_point") {
            beta_records.push_back(r);
        } else if (r.kind() == "profile") {
            std::filesystem::path p = r.get_string("path");
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            profiles.push_back(std::make_shared<const JobGraph>(load_profile(p.string())));
            weights.push_back(r.get_double_or("weight", 1.0));
        } else {
            throw ParseError("unknown config record '" + r.kind() + "'");
        }
    }
    if (!beta_records.empty()) out.sim.beta = beta_from_records(beta_records);
    out.sim.allocation.partition.max_degree = out.sim.max_action();
    out.sim.validate();
    // Config weights are relative; the catalog holds probabilities.
    double total = 0.0;
    for (double w : weights) total += w;
    if (total > 0.0)
        for (double& w : weights) w /= total;
    out.catalog.profiles = std::move(profiles);
    out.catalog.weights = std::move(weights);
    out.catalog.validate();
    return out;
}

EpisodeConfig load_episode_config(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path().string();
    return episode_config_from_records(read_records_file(path), dir.empty() ? "." : dir);
}

std::size_t reason_index(BlockReason r) {
    switch (r) {
        case BlockReason::user_rejection: return 0;
        case BlockReason::deadline: return 1;
        case BlockReason::resources: return 2;
        case BlockReason::invalid_action: return 3;
        case BlockReason::none: break;
    }
    throw std::invalid_argument("reason_index: not a blocking reason");
}

BlockReason reason_at(std::size_t i) {
    static constexpr std::array<BlockReason, kNumBlockReasons> order{
        BlockReason::user_rejection, BlockReason::deadline, BlockReason::resources, BlockReason::invalid_action};
    return order.at(i);
}

double EpisodeMetrics::blocking_rate() const {
    return jobs_arrived ? static_cast<double>(jobs_blocked) / static_cast<double>(jobs_arrived) : 0.0;
}
double EpisodeMetrics::offered_throughput() const { return elapsed > 0.0 ? offered_bytes / elapsed : 0.0; }
double EpisodeMetrics::cluster_throughput() const { return elapsed > 0.0 ? cluster_bytes / elapsed : 0.0; }
double EpisodeMetrics::mean_jct() const {
    return jobs_accepted ? total_jct / static_cast<double>(jobs_accepted) : 0.0;
}
double EpisodeMetrics::mean_speedup() const {
    return jobs_accepted ? total_speedup / static_cast<double>(jobs_accepted) : 0.0;
}

Record EpisodeMetrics::to_record() const {
    Record r("metrics");
    r.add("seed", static_cast<std::int64_t>(seed))
        .add("arrived", jobs_arrived)
        .add("accepted", jobs_accepted)
        .add("blocked", jobs_blocked);
    for (std::size_t i = 0; i < kNumBlockReasons; ++i)
        r.add(std::string("blocked_") + to_string(reason_at(i)), blocked_by_reason[i]);
    r.add("accepted_unsplit", accepted_unsplit)
        .add("blocking_rate", blocking_rate())
        .add("offered_bytes", offered_bytes)
        .add("cluster_bytes", cluster_bytes)
        .add("elapsed", elapsed)
        .add("offered_throughput", offered_throughput())
        .add("cluster_throughput", cluster_throughput())
        .add("total_jct", total_jct)
        .add("mean_jct", mean_jct())
        .add("total_speedup", total_speedup)
        .add("mean_speedup", mean_speedup())
        .add("return", episode_return);
    return r;
}

std::vector<Record> EpisodeMetrics::type_records() const {
    std::vector<Record> out;
    for (const auto& t : per_type)
        out.push_back(Record("job_type")
                          .add_string("model", t.model_name)
                          .add("arrived", t.arrived)
                          .add("accepted", t.accepted)
                          .add("blocked", t.blocked)
                          .add("blocking_rate", t.blocking_rate()));
    return out;
}

EpisodeMetrics EpisodeMetrics::from_records(const Record& r, const std::vector<Record>& types) {
    EpisodeMetrics m;
    m.seed = static_cast<std::uint64_t>(r.get_int("seed"));
    m.jobs_arrived = r.get_int("arrived");
    m.jobs_accepted = r.get_int("accepted");
    m.jobs_blocked = r.get_int("blocked");
    for (std::size_t i = 0; i < kNumBlockReasons; ++i)
        m.blocked_by_reason[i] = r.get_int(std::string("blocked_") + to_string(reason_at(i)));
    m.accepted_unsplit = r.get_int("accepted_unsplit");
    m.offered_bytes = r.get_double("offered_bytes");
    m.cluster_bytes = r.get_double("cluster_bytes");
    m.elapsed = r.get_double("elapsed");
    m.total_jct = r.get_double("total_jct");
    m.total_speedup = r.get_double("total_speedup");
    m.episode_return = r.get_double("return");
    for (const auto& t : types)
        m.per_type.push_back({t.get_string("model"), t.get_int("arrived"), t.get_int("accepted"), t.get_int("blocked")});
    return m;
}

Simulator::Simulator(SimConfig cfg, JobCatalog catalog)
    : cfg_(std::move(cfg)), catalog_(std::move(catalog)), cluster_(cfg_.cluster), rng_(cfg_.seed) {
    cfg_.allocation.partition.max_degree = cfg_.max_action();
    cfg_.validate();
    catalog_.validate();
    horizon_ = to_nanos(cfg_.max_wallclock);
    inter_arrival_ = to_nanos(cfg_.inter_arrival);
    metrics_.seed = cfg_.seed;
    for (const auto& p : catalog_.profiles) metrics_.per_type.push_back({p->model_name(), 0, 0, 0});
    next_decision();
}

void Simulator::release_until(Nanos t) {
    while (!running_.empty() && running_.top().first <= t) {
        cluster_.release(running_.top().second);
        running_.pop();
    }
}

bool Simulator::next_decision() {
    if (done_) return false;
    if (pending_) throw std::logic_error("next_decision: the pending job has not been resolved");
    const Nanos arrival = inter_arrival_ * (arrivals_ + 1);
    if (arrival >= horizon_) {
        release_until(horizon_);
        now_ = std::max(now_, horizon_);
        metrics_.elapsed = to_seconds(now_);
        done_ = true;
        return false;
    }
    release_until(arrival);
    now_ = arrival;
    metrics_.elapsed = to_seconds(now_);
    ++arrivals_;

    JobRequest job;
    job.job_type = weighted_index(rng_, catalog_.weights);
    job.job = catalog_.profiles[job.job_type];
    job.beta_hundredths = cfg_.beta.sample(rng_);
    job.num_iterations = cfg_.num_iterations;
    job.arrival = now_;
    pending_ = std::move(job);
    ++metrics_.jobs_arrived;
    ++metrics_.per_type[pending_->job_type].arrived;
    return true;
}

StepOutcome Simulator::apply_action(int u) {
    if (!pending_) throw std::logic_error("apply_action: no pending job");
    StepOutcome out;
    out.job_id = decisions_;
    out.admission = admit(*pending_, u, cluster_, cfg_.allocation, now_, out.job_id);
    auto& type = metrics_.per_type[pending_->job_type];
    if (out.admission.accepted) {
        out.reward = 1.0;
        running_.emplace(out.admission.completion, out.job_id);
        ++metrics_.jobs_accepted;
        ++type.accepted;
        if (u == 1) ++metrics_.accepted_unsplit;
        const double n = pending_->num_iterations;
        metrics_.offered_bytes += job_info_size(*pending_->job) * n;
        metrics_.cluster_bytes += out.admission.partitioned_info_size * n;
        metrics_.total_jct += out.admission.estimate->jct_seconds();
        const auto makespan = out.admission.estimate->makespan.count();
        metrics_.total_speedup +=
            makespan > 0 ? static_cast<double>(pending_->job->sequential_ticks().count()) / static_cast<double>(makespan)
                         : 1.0;
    } else {
        out.reward = -1.0;
        ++metrics_.jobs_blocked;
        ++metrics_.blocked_by_reason[reason_index(out.admission.reason)];
        ++type.blocked;
    }
    metrics_.episode_return += out.reward;
    ++decisions_;
    pending_.reset();
    return out;
}

}  // namespace rampsim
