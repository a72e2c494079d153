#include "rampsim/allocation.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

#include "rampsim/text_record.hpp"

namespace rampsim {

std::vector<WorkerId> Placement::workers() const {
    std::vector<WorkerId> out;
    out.reserve(memory.size());
    for (const auto& [w, bytes] : memory) out.push_back(w);
    return out;
}

PlacementResult place_operations(const PartitionedJobGraph& pg, const ClusterState& cluster) {
    const auto& job = pg.origin();
    const auto& shape = cluster.shape();
    const auto n_workers = static_cast<std::size_t>(cluster.num_workers());
    const auto free = cluster.free_memory_view();
    std::vector<double> used(n_workers, 0.0);
    std::vector<bool> touched(n_workers, false);

    Placement p;
    p.op_workers.resize(job.num_ops());
    for (auto o : job.topo_order()) {
        const int k = pg.shards(o);
        const double mem = job.ops()[o].memory / k;
        auto room = [&](WorkerId w) {
            const auto i = static_cast<std::size_t>(w);
            return free[i] >= 0.0 && free[i] - used[i] >= mem;
        };

        std::vector<std::size_t> parents;
        for (auto d : job.in_deps(o)) parents.push_back(job.parent_index(d));
        std::sort(parents.begin(), parents.end());
        parents.erase(std::unique(parents.begin(), parents.end()), parents.end());

        std::optional<WorkerSet> chosen;
        for (auto par : parents) {
            const auto& set = p.op_workers[par];
            if (static_cast<int>(set.size()) == k && std::all_of(set.begin(), set.end(), room)) {
                chosen = set;
                break;
            }
        }
        if (!chosen) {
            std::vector<double> avail(n_workers);
            for (std::size_t w = 0; w < n_workers; ++w) avail[w] = free[w] < 0.0 ? free[w] : free[w] - used[w];
            chosen = find_symmetric_set(k, shape, avail, mem);
        }
        if (!chosen)
            return {std::nullopt, PlacementFailure{o, "no symmetric set of " + std::to_string(k) + " workers for op " +
                                                          std::to_string(job.ops()[o].op_id)}};
        for (auto w : *chosen) {
            used[static_cast<std::size_t>(w)] += mem;
            touched[static_cast<std::size_t>(w)] = true;
        }
        p.op_workers[o] = std::move(*chosen);
    }

    p.sub_op_worker.resize(pg.sub_ops().size());
    for (std::size_t s = 0; s < pg.sub_ops().size(); ++s) {
        const auto& sub = pg.sub_ops()[s];
        p.sub_op_worker[s] = p.op_workers[sub.op][static_cast<std::size_t>(sub.shard)];
    }
    for (std::size_t w = 0; w < n_workers; ++w)
        if (touched[w]) p.memory.emplace_back(static_cast<WorkerId>(w), used[w]);

    const int k_paths = cluster.config().k_paths;
    const int channels = cluster.config().comm.channels_per_link;
    std::map<std::pair<WorkerId, WorkerId>, std::optional<EdgeRoute>> cache;
    std::set<ChannelKey> held;
    p.route.resize(pg.edges().size());
    for (std::size_t e = 0; e < pg.edges().size(); ++e) {
        const auto& edge = pg.edges()[e];
        const auto src = p.sub_op_worker[edge.src];
        const auto dst = p.sub_op_worker[edge.dst];
        if (src == dst || !(edge.size > 0.0)) continue;
        auto [it, fresh] = cache.try_emplace({src, dst});
        if (fresh) {
            for (auto& path : k_shortest_paths(src, dst, k_paths, shape)) {
                for (int c = 0; c < channels && !it->second; ++c) {
                    bool ok = true;
                    for (std::size_t h = 0; h + 1 < path.size() && ok; ++h)
                        ok = cluster.channel_free({path[h], path[h + 1], c});
                    if (ok) it->second = EdgeRoute{path, c};
                }
                if (it->second) break;
            }
            if (it->second)
                for (std::size_t h = 0; h + 1 < it->second->path.size(); ++h)
                    held.insert({it->second->path[h], it->second->path[h + 1], it->second->channel});
        }
        if (!it->second)
            return {std::nullopt, PlacementFailure{pg.sub_ops()[edge.src].op,
                                                   "no free channel between workers " + std::to_string(src) + " and " +
                                                       std::to_string(dst)}};
        p.route[e] = it->second;
    }
    p.channels.assign(held.begin(), held.end());
    return {std::move(p), std::nullopt};
}

Nanos compute_critical_path(const PartitionedJobGraph& pg) {
    const auto& job = pg.origin();
    std::vector<std::uint32_t> order;
    order.reserve(pg.sub_ops().size());
    for (auto o : job.topo_order())
        for (int s = 0; s < pg.shards(o); ++s) order.push_back(pg.forward_id(o, s));
    for (auto it = job.topo_order().rbegin(); it != job.topo_order().rend(); ++it)
        for (int s = 0; s < pg.shards(*it); ++s) order.push_back(pg.backward_id(*it, s));

    std::vector<Nanos> longest(pg.sub_ops().size(), Nanos{0});
    Nanos best{0};
    for (auto s : order) {
        Nanos before{0};
        for (auto e : pg.in_edges(s)) before = std::max(before, longest[pg.edges()[e].src]);
        if (s >= pg.num_forward()) before = std::max(before, longest[pg.twin(s)]);
        longest[s] = before + pg.sub_ops()[s].duration;
        best = std::max(best, longest[s]);
    }
    return best;
}

namespace {

// One-iteration discrete-event run. Workers and channel slots are resources;
// a routed edge needs every slot on its path at once.
class IterationSim {
public:
    IterationSim(const PartitionedJobGraph& pg, const Placement& placement, const CommConfig& comm,
                 const CollectiveModel& collective)
        : pg_(pg), pl_(placement), comm_(comm), collective_(collective) {
        const auto n_sub = pg.sub_ops().size();
        const auto n_edge = pg.edges().size();
        s_.sub_op_start.assign(n_sub, Nanos{-1});
        s_.sub_op_end.assign(n_sub, Nanos{-1});
        s_.edge_start.assign(n_edge, Nanos{-1});
        s_.edge_end.assign(n_edge, Nanos{-1});
        s_.collective_end.assign(pg.origin().num_ops(), std::nullopt);

        pending_.resize(n_sub);
        for (std::uint32_t s = 0; s < n_sub; ++s)
            pending_[s] = pg.in_edges(s).size() + (s >= pg.num_forward() ? 1 : 0);
        backward_done_.assign(pg.origin().num_ops(), 0);

        WorkerId max_worker = 0;
        for (auto w : pl_.sub_op_worker) max_worker = std::max(max_worker, w);
        worker_queue_.resize(static_cast<std::size_t>(max_worker) + 1);
        worker_busy_.assign(worker_queue_.size(), false);
        worker_dirty_.assign(worker_queue_.size(), false);

        std::map<ChannelKey, std::uint32_t> slot_index;
        edge_slots_.resize(n_edge);
        edge_duration_.assign(n_edge, Nanos{0});
        for (std::size_t e = 0; e < n_edge; ++e) {
            const auto& route = pl_.route[e];
            if (!route || pg.edges()[e].kind == EdgeKind::collective) continue;
            for (std::size_t h = 0; h + 1 < route->path.size(); ++h) {
                auto [it, fresh] = slot_index.try_emplace({route->path[h], route->path[h + 1], route->channel},
                                                          static_cast<std::uint32_t>(slot_index.size()));
                edge_slots_[e].push_back(it->second);
            }
            edge_duration_[e] = to_nanos(path_transfer_time(pg.edges()[e].size, route->hops(), comm_));
        }
        slot_queue_.resize(slot_index.size());
        slot_busy_.assign(slot_index.size(), false);
        slot_dirty_.assign(slot_index.size(), false);
    }

    Schedule run() {
        for (std::uint32_t s = 0; s < pending_.size(); ++s)
            if (pending_[s] == 0) make_ready(s);
        dispatch(Nanos{0});
        while (!events_.empty()) {
            const Nanos now{std::get<0>(events_.top())};
            while (!events_.empty() && std::get<0>(events_.top()) == now.count()) {
                auto [t, kind, id] = events_.top();
                events_.pop();
                if (kind == 0)
                    finish_sub_op(id, now);
                else
                    finish_edge(id, now);
            }
            dispatch(now);
        }
        for (std::size_t s = 0; s < pending_.size(); ++s)
            if (s_.sub_op_end[s] < Nanos{0}) throw std::logic_error("schedule stalled: sub-op never ran");
        return std::move(s_);
    }

private:
    using Event = std::tuple<std::int64_t, int, std::uint32_t>;

    std::size_t worker_of(std::uint32_t s) const { return static_cast<std::size_t>(pl_.sub_op_worker[s]); }

    void bump(Nanos t) { s_.makespan = std::max(s_.makespan, t); }

    void make_ready(std::uint32_t s) {
        const auto w = worker_of(s);
        worker_queue_[w].insert({pg_.sub_ops()[s].duration.count(), s});
        mark_worker(w);
    }

    void mark_worker(std::size_t w) {
        if (!worker_dirty_[w]) {
            worker_dirty_[w] = true;
            dirty_workers_.push_back(w);
        }
    }

    void mark_slot(std::uint32_t r) {
        if (!slot_dirty_[r]) {
            slot_dirty_[r] = true;
            dirty_slots_.push_back(r);
        }
    }

    void arrive(std::uint32_t e, Nanos now) {
        const auto dst = pg_.edges()[e].dst;
        if (--pending_[dst] == 0) make_ready(dst);
        bump(now);
    }

    void finish_sub_op(std::uint32_t s, Nanos now) {
        worker_busy_[worker_of(s)] = false;
        mark_worker(worker_of(s));
        bump(now);
        const auto& sub = pg_.sub_ops()[s];
        if (sub.pass == Pass::forward) {
            if (--pending_[pg_.twin(s)] == 0) make_ready(pg_.twin(s));
        } else if (++backward_done_[sub.op] == pg_.shards(sub.op) && pg_.shards(sub.op) > 1) {
            const int k = pg_.shards(sub.op);
            const Nanos end = now + to_nanos(collective_(k, pg_.origin().ops()[sub.op].memory / k, comm_));
            s_.collective_end[sub.op] = end;
            for (auto e : pg_.collective_edges(sub.op)) {
                s_.edge_start[e] = now;
                s_.edge_end[e] = end;
            }
            bump(end);
        }
        for (auto e : pg_.out_edges(s)) {
            if (edge_slots_[e].empty()) {
                s_.edge_start[e] = s_.edge_end[e] = now;
                arrive(e, now);
                continue;
            }
            const std::pair<double, std::uint32_t> key{pg_.edges()[e].size, e};
            for (auto r : edge_slots_[e]) {
                slot_queue_[r].insert(key);
                mark_slot(r);
            }
        }
    }

    void finish_edge(std::uint32_t e, Nanos now) {
        for (auto r : edge_slots_[e]) {
            slot_busy_[r] = false;
            mark_slot(r);
        }
        arrive(e, now);
    }

    void dispatch(Nanos now) {
        while (!dirty_workers_.empty() || !dirty_slots_.empty()) {
            while (!dirty_workers_.empty()) {
                const auto w = dirty_workers_.back();
                dirty_workers_.pop_back();
                worker_dirty_[w] = false;
                if (worker_busy_[w] || worker_queue_[w].empty()) continue;
                const auto [dur, s] = *worker_queue_[w].begin();
                worker_queue_[w].erase(worker_queue_[w].begin());
                worker_busy_[w] = true;
                s_.sub_op_start[s] = now;
                s_.sub_op_end[s] = now + Nanos{dur};
                events_.emplace(s_.sub_op_end[s].count(), 0, s);
            }
            while (!dirty_slots_.empty()) {
                const auto r = dirty_slots_.back();
                dirty_slots_.pop_back();
                slot_dirty_[r] = false;
                if (slot_busy_[r] || slot_queue_[r].empty()) continue;
                const auto head = *slot_queue_[r].begin();
                const auto e = head.second;
                bool ok = true;
                for (auto q : edge_slots_[e])
                    ok = ok && !slot_busy_[q] && *slot_queue_[q].begin() == head;
                if (!ok) continue;
                for (auto q : edge_slots_[e]) {
                    slot_queue_[q].erase(slot_queue_[q].begin());
                    slot_busy_[q] = true;
                }
                s_.edge_start[e] = now;
                s_.edge_end[e] = now + edge_duration_[e];
                events_.emplace(s_.edge_end[e].count(), 1, e);
            }
        }
    }

    const PartitionedJobGraph& pg_;
    const Placement& pl_;
    const CommConfig& comm_;
    const CollectiveModel& collective_;
    Schedule s_;

    std::vector<std::size_t> pending_;
    std::vector<int> backward_done_;
    std::vector<std::set<std::pair<std::int64_t, std::uint32_t>>> worker_queue_;
    std::vector<bool> worker_busy_, worker_dirty_;
    std::vector<std::size_t> dirty_workers_;
    std::vector<std::vector<std::uint32_t>> edge_slots_;
    std::vector<Nanos> edge_duration_;
    std::vector<std::set<std::pair<double, std::uint32_t>>> slot_queue_;
    std::vector<bool> slot_busy_, slot_dirty_;
    std::vector<std::uint32_t> dirty_slots_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
};

}  // namespace

JctEstimate schedule_and_estimate(const PartitionedJobGraph& pg, const Placement& placement, int num_iterations,
                                  const CommConfig& comm, const CollectiveModel& collective, Schedule* schedule_out) {
    if (num_iterations < 1) throw std::invalid_argument("num_iterations must be >= 1");
    if (placement.sub_op_worker.size() != pg.sub_ops().size() || placement.route.size() != pg.edges().size())
        throw std::invalid_argument("placement does not match partitioned graph");
    Schedule schedule = IterationSim(pg, placement, comm, collective).run();

    JctEstimate est;
    est.makespan = schedule.makespan;
    est.jct = schedule.makespan * num_iterations;
    est.compute_critical_path = compute_critical_path(pg);
    if (est.makespan > Nanos{0}) {
        const auto gap = (est.makespan - est.compute_critical_path).count();
        est.network_overhead_fraction = std::max(0.0, static_cast<double>(gap) / static_cast<double>(est.makespan.count()));
    }
    if (schedule_out) *schedule_out = std::move(schedule);
    return est;
}

const char* to_string(BlockReason r) {
    switch (r) {
        case BlockReason::none: return "none";
        case BlockReason::user_rejection: return "user_rejection";
        case BlockReason::deadline: return "deadline";
        case BlockReason::resources: return "resources";
        case BlockReason::invalid_action: return "invalid_action";
    }
    return "?";
}

BlockReason parse_block_reason(std::string_view s) {
    for (auto r : {BlockReason::none, BlockReason::user_rejection, BlockReason::deadline, BlockReason::resources,
                   BlockReason::invalid_action})
        if (s == to_string(r)) return r;
    throw ParseError("unknown block reason '" + std::string(s) + "'");
}

ActionCheck action_validity(const JobGraph& job, int u, const ClusterState& cluster, const PartitionConfig& cfg) {
    if (u < 1) return {false, "degree must be >= 1"};
    if (!is_valid_degree(u)) return {false, "odd degree " + std::to_string(u)};
    if (u > cfg.max_degree) return {false, "degree above maximum " + std::to_string(cfg.max_degree)};
    if (u > cluster.free_workers())
        return {false, "degree " + std::to_string(u) + " exceeds " + std::to_string(cluster.free_workers()) +
                           " free workers"};
    std::map<int, double> largest_shard;
    const auto k = shard_counts(job, u, cfg);
    for (std::size_t i = 0; i < job.num_ops(); ++i) {
        auto& m = largest_shard[k[i]];
        m = std::max(m, job.ops()[i].memory / k[i]);
    }
    const auto free = cluster.free_memory_view();
    for (const auto& [n, mem] : largest_shard)
        if (!find_symmetric_set(n, cluster.shape(), free, mem))
            return {false, "no symmetric set of " + std::to_string(n) + " workers"};
    return {true, {}};
}

bool meets_deadline(const JobRequest& job, Nanos makespan) {
    return makespan.count() * 100 <= static_cast<std::int64_t>(job.beta_hundredths) * job.job->sequential_ticks().count();
}

AdmissionResult admit(const JobRequest& job, int u, ClusterState& cluster, const AllocationConfig& cfg, Nanos now,
                      JobId id) {
    const int max_action = cluster.num_workers() / 2;
    if (u < 0 || u > max_action)
        throw std::invalid_argument("action " + std::to_string(u) + " outside [0, " + std::to_string(max_action) + "]");
    AdmissionResult r;
    r.degree = u;
    if (u == 0) {
        r.reason = BlockReason::user_rejection;
        return r;
    }
    if (auto check = action_validity(*job.job, u, cluster, cfg.partition); !check.valid) {
        r.reason = BlockReason::invalid_action;
        r.detail = std::move(check.reason);
        return r;
    }
    const PartitionedJobGraph pg(job.job, u, cfg.partition);
    auto placed = place_operations(pg, cluster);
    if (!placed.placement) {
        r.reason = BlockReason::resources;
        r.detail = placed.failure->detail;
        return r;
    }
    r.estimate = schedule_and_estimate(pg, *placed.placement, job.num_iterations, cluster.config().comm, cfg.collective);
    r.partitioned_info_size = partitioned_info_size(pg);
    if (!meets_deadline(job, r.estimate->makespan)) {
        r.reason = BlockReason::deadline;
        return r;
    }
    Reservation res;
    res.job = id;
    res.memory = std::move(placed.placement->memory);
    res.channels = std::move(placed.placement->channels);
    res.start = now;
    res.end = now + r.estimate->jct;
    cluster.reserve(std::move(res));
    r.accepted = true;
    r.completion = now + r.estimate->jct;
    return r;
}

void write_schedule_trace(std::ostream& out, const PartitionedJobGraph& pg, const Placement& placement,
                          const Schedule& schedule) {
    // (time, end-before-start, entity, id) -> record
    std::vector<std::pair<std::tuple<std::int64_t, int, int, std::size_t>, Record>> events;
    for (std::size_t s = 0; s < pg.sub_ops().size(); ++s) {
        const auto& sub = pg.sub_ops()[s];
        for (int phase = 0; phase < 2; ++phase) {
            const Nanos t = phase == 0 ? schedule.sub_op_end[s] : schedule.sub_op_start[s];
            Record r("event");
            r.add("t_ns", static_cast<std::int64_t>(t.count()))
                .add("entity", std::string("subop"))
                .add("id", s)
                .add("op", pg.origin().ops()[sub.op].op_id)
                .add("shard", sub.shard)
                .add("pass", std::string(to_string(sub.pass)))
                .add("worker", placement.sub_op_worker[s])
                .add("action", std::string(phase == 0 ? "end" : "start"));
            events.push_back({{t.count(), phase, 0, s}, std::move(r)});
        }
    }
    for (std::size_t e = 0; e < pg.edges().size(); ++e) {
        const auto& edge = pg.edges()[e];
        if (edge.kind == EdgeKind::collective || !placement.route[e]) continue;
        for (int phase = 0; phase < 2; ++phase) {
            const Nanos t = phase == 0 ? schedule.edge_end[e] : schedule.edge_start[e];
            Record r("event");
            r.add("t_ns", static_cast<std::int64_t>(t.count()))
                .add("entity", std::string("edge"))
                .add("id", e)
                .add("kind", std::string(to_string(edge.kind)))
                .add("src", placement.route[e]->path.front())
                .add("dst", placement.route[e]->path.back())
                .add("channel", placement.route[e]->channel)
                .add("action", std::string(phase == 0 ? "end" : "start"));
            events.push_back({{t.count(), phase, 1, e}, std::move(r)});
        }
    }
    for (std::size_t o = 0; o < schedule.collective_end.size(); ++o) {
        if (!schedule.collective_end[o]) continue;
        const auto& ids = pg.collective_edges(o);
        const Nanos start = schedule.edge_start[ids.front()];
        for (int phase = 0; phase < 2; ++phase) {
            const Nanos t = phase == 0 ? *schedule.collective_end[o] : start;
            Record r("event");
            r.add("t_ns", static_cast<std::int64_t>(t.count()))
                .add("entity", std::string("collective"))
                .add("id", o)
                .add("op", pg.origin().ops()[o].op_id)
                .add("participants", pg.shards(o))
                .add("action", std::string(phase == 0 ? "end" : "start"));
            events.push_back({{t.count(), phase, 2, o}, std::move(r)});
        }
    }
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [key, rec] : events) out << rec.to_line() << '\n';
}

}  // namespace rampsim
