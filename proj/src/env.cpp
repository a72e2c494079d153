#include "rampsim/env.hpp"

#include <algorithm>

#include "rampsim/text_record.hpp"

namespace rampsim {

bool Observation::operator==(const Observation& o) const {
    return op_features == o.op_features && dep_features == o.dep_features && edge_list == o.edge_list &&
           global_job == o.global_job && global_cluster == o.global_cluster && action_mask == o.action_mask &&
           decision_index == o.decision_index;
}

namespace {

std::array<double, kGlobalJobFeatures> raw_global_job(const JobGraph& job, const JobStats& st, double beta,
                                                      int num_iterations) {
    std::array<double, kGlobalJobFeatures> f{};
    f[gj_num_ops] = static_cast<double>(st.num_ops);
    f[gj_num_deps] = static_cast<double>(st.num_deps);
    f[gj_sequential_jct] = job.sequential_jct();
    f[gj_max_acceptable_jct] = beta * job.sequential_jct() * num_iterations;
    f[gj_beta_raw] = beta;
    f[gj_beta] = beta;
    f[gj_total_memory] = st.total_memory;
    f[gj_total_dep_size] = st.total_dep_size;
    f[gj_num_iterations] = num_iterations;
    f[gj_mean_compute] = st.mean_compute;
    f[gj_median_compute] = st.median_compute;
    f[gj_mean_memory] = st.mean_memory;
    f[gj_median_memory] = st.median_memory;
    f[gj_mean_dep_size] = st.mean_dep_size;
    f[gj_median_dep_size] = st.median_dep_size;
    return f;
}

double ratio(double v, double max) { return max > 0.0 ? v / max : 0.0; }

// Index of the first maximum, so exactly one entry is flagged.
Eigen::Index first_max(const Eigen::VectorXd& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

}  // namespace

FeatureNormalisers catalog_normalisers(const JobCatalog& catalog, const SimConfig& cfg) {
    FeatureNormalisers n;
    const double beta_max = cfg.beta.max_value() / 100.0;
    for (const auto& p : catalog.profiles) {
        const auto f = raw_global_job(*p, job_stats(*p), beta_max, cfg.num_iterations);
        for (int i = 0; i < kGlobalJobFeatures; ++i) n.global_job[i] = std::max(n.global_job[i], f[i]);
    }
    n.global_job[gj_beta_raw] = 1.0;
    return n;
}

std::vector<std::uint8_t> action_mask(const Simulator& sim) {
    const auto* job = sim.pending();
    if (!job) throw std::logic_error("action_mask: no pending job");
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(sim.config().max_action()), 0);
    for (int u = 1; u <= sim.config().max_action(); ++u)
        mask[static_cast<std::size_t>(u - 1)] =
            action_validity(*job->job, u, sim.cluster(), sim.config().allocation.partition).valid;
    return mask;
}

Observation observe(const Simulator& sim, const FeatureNormalisers& norm) {
    const auto* req = sim.pending();
    if (!req) throw std::logic_error("observe: no pending job");
    const auto& job = *req->job;
    const auto n_ops = static_cast<Eigen::Index>(job.num_ops());
    const auto n_deps = static_cast<Eigen::Index>(job.num_deps());
    Observation obs;

    Eigen::VectorXd compute(n_ops), memory(n_ops), depth(n_ops);
    for (Eigen::Index i = 0; i < n_ops; ++i) {
        const auto& op = job.ops()[static_cast<std::size_t>(i)];
        compute[i] = op.compute_time;
        memory[i] = op.memory;
        depth[i] = op.depth;
    }
    obs.op_features = Eigen::MatrixXd::Zero(n_ops, kOpFeatures);
    if (n_ops > 0) {
        obs.op_features.col(0) = compute / std::max(compute.maxCoeff(), 0.0);
        obs.op_features(first_max(compute), 1) = 1.0;
        obs.op_features.col(2) = memory / std::max(memory.maxCoeff(), 0.0);
        obs.op_features(first_max(memory), 3) = 1.0;
        obs.op_features.col(4) = depth / std::max<double>(job.max_depth(), 0.0);
        // A column whose maximum is zero divides to NaN; it carries no signal.
        obs.op_features = obs.op_features.unaryExpr([](double v) { return std::isfinite(v) ? v : 0.0; });
    }

    obs.dep_features = Eigen::MatrixXd::Zero(n_deps, kDepFeatures);
    obs.edge_list.resize(n_deps, 2);
    if (n_deps > 0) {
        Eigen::VectorXd size(n_deps);
        for (Eigen::Index d = 0; d < n_deps; ++d) {
            size[d] = job.deps()[static_cast<std::size_t>(d)].size;
            obs.edge_list(d, 0) = static_cast<std::int64_t>(job.parent_index(static_cast<std::size_t>(d)));
            obs.edge_list(d, 1) = static_cast<std::int64_t>(job.child_index(static_cast<std::size_t>(d)));
        }
        const double max = size.maxCoeff();
        if (max > 0.0) obs.dep_features.col(0) = size / max;
        obs.dep_features(first_max(size), 1) = 1.0;
    }

    const auto raw = raw_global_job(job, job_stats(job), req->beta(), req->num_iterations);
    obs.global_job.resize(kGlobalJobFeatures);
    for (int i = 0; i < kGlobalJobFeatures; ++i)
        obs.global_job[i] = i == gj_beta_raw ? raw[i] : ratio(raw[i], norm.global_job[i]);

    const double n_workers = sim.cluster().num_workers();
    obs.global_cluster.resize(kGlobalClusterFeatures);
    obs.global_cluster << sim.cluster().occupied_workers() / n_workers,
        static_cast<double>(sim.cluster().running_jobs()) / n_workers;

    obs.action_mask = action_mask(sim);
    obs.decision_index = sim.decision_index();
    return obs;
}

Env::Env(EpisodeConfig base) : base_(std::move(base)) {
    base_.sim.allocation.partition.max_degree = base_.sim.max_action();
    base_.sim.validate();
    base_.catalog.validate();
}

Observation Env::reset(std::uint64_t seed, const Record* overrides) {
    SimConfig cfg = base_.sim;
    if (overrides) apply_overrides(cfg, *overrides);
    cfg.seed = seed;
    sim_.emplace(cfg, base_.catalog);
    norm_ = catalog_normalisers(base_.catalog, sim_->config());
    if (sim_->done()) throw EnvError("episode has no decisions: horizon is shorter than one inter-arrival");
    return observe(*sim_, norm_);
}

Transition Env::step(int action) {
    if (!sim_) throw EnvError("step before reset");
    if (sim_->done()) throw EnvError("step after episode end");
    if (action < 0 || action > base_.sim.max_action())
        throw EnvError("malformed action " + std::to_string(action) + ": expected 0.." +
                       std::to_string(base_.sim.max_action()));
    const auto* job = sim_->pending();
    Transition t;
    t.info.action = action;
    t.info.jct_seq = job->job->sequential_jct() * job->num_iterations;
    const auto out = sim_->apply_action(action);
    t.reward = out.reward;
    t.info.accepted = out.admission.accepted;
    t.info.reason = out.admission.reason;
    t.info.detail = out.admission.detail;
    if (out.admission.estimate) t.info.jct = out.admission.estimate->jct_seconds();
    sim_->next_decision();
    t.done = sim_->done();
    if (!t.done) {
        t.observation = observe(*sim_, norm_);
        t.info.next_mask = t.observation->action_mask;
    }
    return t;
}

bool Env::done() const { return !sim_ || sim_->done(); }

const EpisodeMetrics& Env::metrics() const {
    if (!sim_) throw EnvError("metrics before reset");
    return sim_->metrics();
}

const Simulator& Env::simulator() const {
    if (!sim_) throw EnvError("no episode");
    return *sim_;
}

EpisodeMetrics run_episode(const SimConfig& cfg, const JobCatalog& catalog, const Policy& policy) {
    Simulator sim(cfg, catalog);
    const auto norm = catalog_normalisers(sim.catalog(), sim.config());
    while (!sim.done()) {
        int u = 0;
        try {
            u = policy(observe(sim, norm));
            sim.apply_action(u);
        } catch (const std::exception& e) {
            throw std::runtime_error("episode seed " + std::to_string(cfg.seed) + ", decision " +
                                     std::to_string(sim.decision_index()) + ": " + e.what());
        }
        sim.next_decision();
    }
    return sim.metrics();
}

}  // namespace rampsim
