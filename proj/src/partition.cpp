#include "rampsim/partition.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "rampsim/text_record.hpp"

namespace rampsim {

void PartitionConfig::validate() const {
    if (!(quantum > 0.0)) throw std::invalid_argument("partition quantum must be > 0");
    if (max_degree < 1) throw std::invalid_argument("partition max_degree must be >= 1");
}

int max_splits(double compute_time, double quantum, int degree) {
    if (!(quantum > 0.0) || degree < 1) throw std::invalid_argument("max_splits: quantum > 0 and degree >= 1 required");
    const double ratio = compute_time / quantum;
    if (!(ratio >= 2.0) || degree < 2) return 1;
    long k = std::min<long>(degree, static_cast<long>(std::floor(ratio)));
    // The shard time actually computed downstream is compute_time / k; make
    // the quantum hold for that exact quotient.
    if (k < degree && compute_time / static_cast<double>(k + 1) >= quantum) ++k;
    while (k > 1 && compute_time / static_cast<double>(k) < quantum) --k;
    if (k > 1 && k % 2 == 1) --k;
    return static_cast<int>(std::max<long>(k, 1));
}

const char* to_string(Pass p) { return p == Pass::forward ? "forward" : "backward"; }

const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::data: return "data";
        case EdgeKind::gradient: return "gradient";
        case EdgeKind::collective: return "collective";
    }
    return "?";
}

std::vector<ShardTransfer> replicate_all_to_all(double size, int parent_k, int child_k) {
    std::vector<ShardTransfer> out;
    out.reserve(static_cast<std::size_t>(parent_k) * static_cast<std::size_t>(child_k));
    const double piece = size / parent_k;
    for (int i = 0; i < parent_k; ++i)
        for (int j = 0; j < child_k; ++j) out.push_back({i, j, piece});
    return out;
}

std::vector<ShardTransfer> replicate_matched(double size, int parent_k, int child_k) {
    std::vector<ShardTransfer> out;
    out.reserve(static_cast<std::size_t>(child_k));
    for (int j = 0; j < child_k; ++j) out.push_back({j % parent_k, j, size / parent_k});
    return out;
}

std::vector<int> shard_counts(const JobGraph& job, int degree, const PartitionConfig& cfg) {
    std::vector<int> k(job.num_ops());
    for (std::size_t i = 0; i < job.num_ops(); ++i) k[i] = max_splits(job.ops()[i].compute_time, cfg.quantum, degree);
    return k;
}

PartitionedJobGraph::PartitionedJobGraph(JobGraphPtr origin, int degree, const PartitionConfig& cfg,
                                         const ReplicationRule& rule)
    : origin_(std::move(origin)), degree_(degree) {
    cfg.validate();
    if (!origin_) throw std::invalid_argument("partition_job: null job");
    if (degree < 1 || degree > cfg.max_degree)
        throw std::invalid_argument("partition degree " + std::to_string(degree) + " outside [1, " +
                                    std::to_string(cfg.max_degree) + "]");
    const auto& job = *origin_;
    shards_ = rampsim::shard_counts(job, degree, cfg);

    first_.resize(job.num_ops());
    std::uint32_t next = 0;
    for (std::size_t i = 0; i < job.num_ops(); ++i) {
        first_[i] = next;
        next += static_cast<std::uint32_t>(shards_[i]);
    }
    backward_offset_ = next;

    sub_ops_.resize(2 * static_cast<std::size_t>(next));
    for (std::size_t i = 0; i < job.num_ops(); ++i) {
        const int k = shards_[i];
        const auto& op = job.ops()[i];
        const double compute = op.compute_time / k;
        const double memory = op.memory / k;
        const Nanos ticks = to_nanos(compute);
        const Nanos fwd{ticks.count() / 2};
        for (int s = 0; s < k; ++s) {
            sub_ops_[forward_id(i, s)] = {i, s, Pass::forward, compute, memory, fwd};
            sub_ops_[backward_id(i, s)] = {i, s, Pass::backward, compute, memory, ticks - fwd};
        }
    }

    out_.assign(sub_ops_.size(), {});
    in_.assign(sub_ops_.size(), {});
    collectives_.assign(job.num_ops(), {});
    auto add_edge = [&](std::uint32_t src, std::uint32_t dst, double size, EdgeKind kind, std::uint32_t origin_id) {
        const auto id = static_cast<std::uint32_t>(edges_.size());
        edges_.push_back({src, dst, size, kind, origin_id});
        if (kind == EdgeKind::collective) return id;
        out_[src].push_back(id);
        in_[dst].push_back(id);
        return id;
    };

    for (std::size_t d = 0; d < job.num_deps(); ++d) {
        const auto p = job.parent_index(d);
        const auto c = job.child_index(d);
        for (const auto& t : rule(job.deps()[d].size, shards_[p], shards_[c]))
            add_edge(forward_id(p, t.parent_shard), forward_id(c, t.child_shard), t.size, EdgeKind::data,
                     static_cast<std::uint32_t>(d));
    }
    // Gradients retrace every data edge backwards. Between two unsplit ops the
    // gradient is treated as co-located: a pure ordering constraint.
    const auto num_data = edges_.size();
    for (std::size_t e = 0; e < num_data; ++e) {
        const auto data = edges_[e];
        const auto& ps = sub_ops_[data.src];
        const auto& cs = sub_ops_[data.dst];
        const bool unsplit = shards_[ps.op] == 1 && shards_[cs.op] == 1;
        add_edge(backward_id(cs.op, cs.shard), backward_id(ps.op, ps.shard), unsplit ? 0.0 : data.size,
                 EdgeKind::gradient, data.dep);
    }
    for (std::size_t i = 0; i < job.num_ops(); ++i) {
        const int k = shards_[i];
        if (k < 2) continue;
        const double per_member = job.ops()[i].memory / k;
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b)
                if (a != b)
                    collectives_[i].push_back(add_edge(backward_id(i, a), backward_id(i, b), per_member,
                                                       EdgeKind::collective, static_cast<std::uint32_t>(i)));
    }
}

PartitionedJobGraph partition_job(const JobRequest& request, int degree, const PartitionConfig& cfg) {
    return PartitionedJobGraph(request.job, degree, cfg);
}

PartitionedJobGraph partition_job(JobGraphPtr job, int degree, const PartitionConfig& cfg) {
    return PartitionedJobGraph(std::move(job), degree, cfg);
}

double partitioned_info_size(const PartitionedJobGraph& pg) {
    double total = 0.0;
    for (std::uint32_t i = 0; i < pg.num_forward(); ++i) total += pg.sub_ops()[i].memory;
    for (const auto& e : pg.edges()) total += e.size;
    return total;
}

void write_partitioned(std::ostream& out, const PartitionedJobGraph& pg) {
    out << Record("partitioned").add_string("model", pg.origin().model_name()).add("degree", pg.degree()).to_line()
        << '\n';
    for (std::size_t i = 0; i < pg.sub_ops().size(); ++i) {
        const auto& s = pg.sub_ops()[i];
        out << Record("subop")
                   .add("id", i)
                   .add("op", pg.origin().ops()[s.op].op_id)
                   .add("shard", s.shard)
                   .add("pass", std::string(to_string(s.pass)))
                   .add("compute", s.compute_time)
                   .add("memory", s.memory)
                   .add("duration_ns", static_cast<std::int64_t>(s.duration.count()))
                   .to_line()
            << '\n';
    }
    for (std::size_t i = 0; i < pg.edges().size(); ++i) {
        const auto& e = pg.edges()[i];
        out << Record("edge")
                   .add("id", i)
                   .add("src", static_cast<std::int64_t>(e.src))
                   .add("dst", static_cast<std::int64_t>(e.dst))
                   .add("size", e.size)
                   .add("kind", std::string(to_string(e.kind)))
                   .to_line()
            << '\n';
    }
}

}  // namespace rampsim
