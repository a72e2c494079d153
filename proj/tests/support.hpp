#pragma once

// Shared fixtures and brute-force oracles for the test binaries.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rampsim/allocation.hpp"
#include "rampsim/sim.hpp"

namespace rampsim::testing {

inline std::string source_path(const std::string& rel) { return std::string(RAMPSIM_SOURCE_DIR) + "/" + rel; }

inline const std::vector<std::string>& profile_names() {
    static const std::vector<std::string> names{"resnet18", "vgg16", "gnmt", "squeezenet10", "alexnet"};
    return names;
}

inline JobGraphPtr load_reference(const std::string& name) {
    return std::make_shared<const JobGraph>(load_profile(source_path("data/profiles/" + name + ".profile")));
}

/// Linear chain of ops with the given compute times and equal dep sizes.
inline JobGraphPtr chain(const std::vector<double>& compute, double dep_size, double memory = 1.0) {
    std::vector<Operation> ops;
    std::vector<Dependency> deps;
    for (std::size_t i = 0; i < compute.size(); ++i) {
        ops.push_back({static_cast<std::int64_t>(i), compute[i], memory, 0});
        if (i > 0)
            deps.push_back({static_cast<std::int64_t>(i - 1), static_cast<std::int64_t>(i - 1),
                            static_cast<std::int64_t>(i), dep_size});
    }
    return std::make_shared<const JobGraph>("chain", std::move(ops), std::move(deps));
}

inline JobRequest request(JobGraphPtr job, int beta_hundredths, int iterations = 1) {
    JobRequest r;
    r.job = std::move(job);
    r.beta_hundredths = beta_hundredths;
    r.num_iterations = iterations;
    return r;
}

inline ClusterConfig cluster_config(RampShape shape) {
    ClusterConfig c;
    c.shape = shape;
    c.comm = CommConfig::for_shape(shape);
    return c;
}

// Symmetry oracle ------------------------------------------------------------
//
// Generative: builds every symmetric subset of a small shape straight from the
// rule wording, as bitmasks over worker ids, and labels it with its rule.
// Membership is then looked up rather than decided by inspecting a set.

inline std::map<std::uint64_t, SymmetryRule> enumerate_symmetric_sets(const RampShape& shape) {
    const int n = shape.num_workers();
    std::map<std::uint64_t, SymmetryRule> out;
    std::vector<std::vector<int>> rack_workers(static_cast<std::size_t>(shape.n_r));
    for (int w = 0; w < n; ++w) rack_workers[static_cast<std::size_t>(worker_coord(w, shape).r)].push_back(w);

    auto groups_of = [&](std::uint64_t mask) {
        std::set<int> g;
        for (int w = 0; w < n; ++w)
            if (mask >> w & 1u) g.insert(worker_coord(w, shape).c);
        return g;
    };
    // All subsets of one rack's workers as masks.
    auto rack_subsets = [&](int r) {
        const auto& ws = rack_workers[static_cast<std::size_t>(r)];
        std::vector<std::uint64_t> subs;
        for (std::uint64_t bits = 1; bits < (std::uint64_t{1} << ws.size()); ++bits) {
            std::uint64_t m = 0;
            for (std::size_t i = 0; i < ws.size(); ++i)
                if (bits >> i & 1u) m |= std::uint64_t{1} << ws[i];
            subs.push_back(m);
        }
        return subs;
    };

    for (int w = 0; w < n; ++w) out[std::uint64_t{1} << w] = SymmetryRule::singleton;

    // Rule 2: several workers on one rack, every one in its own group.
    for (int r = 0; r < shape.n_r; ++r)
        for (auto m : rack_subsets(r))
            if (std::popcount(m) >= 2 && static_cast<int>(groups_of(m).size()) == std::popcount(m))
                out[m] = SymmetryRule::single_rack;

    // Rules 1 and 3 over every choice of two or more racks.
    for (std::uint32_t racks = 1; racks < (1u << shape.n_r); ++racks) {
        const int R = std::popcount(racks);
        if (R < 2) continue;
        std::vector<int> chosen;
        for (int r = 0; r < shape.n_r; ++r)
            if (racks >> r & 1u) chosen.push_back(r);
        // Cartesian product of per-rack subsets.
        std::vector<std::uint64_t> partial{0};
        for (int r : chosen) {
            std::vector<std::uint64_t> next;
            for (auto p : partial)
                for (auto m : rack_subsets(r)) next.push_back(p | m);
            partial = std::move(next);
        }
        for (auto m : partial) {
            std::vector<std::uint64_t> per_rack;
            for (int r : chosen) {
                std::uint64_t rm = 0;
                for (int w : rack_workers[static_cast<std::size_t>(r)]) rm |= m & (std::uint64_t{1} << w);
                per_rack.push_back(rm);
            }
            const int S = std::popcount(per_rack.front());
            bool equal = true;
            for (auto rm : per_rack) equal = equal && std::popcount(rm) == S;
            if (!equal) continue;
            if (S == 1) {
                if (static_cast<int>(groups_of(m).size()) == R) out[m] = SymmetryRule::one_per_rack;
                continue;
            }
            bool spans = true;
            for (auto rm : per_rack) spans = spans && static_cast<int>(groups_of(rm).size()) >= R;
            if (spans) out[m] = SymmetryRule::multi_rack;
        }
    }
    return out;
}

inline WorkerSet mask_to_set(std::uint64_t mask) {
    WorkerSet s;
    for (int w = 0; w < 64; ++w)
        if (mask >> w & 1u) s.push_back(w);
    return s;
}

/// Lexicographically first n-subset (ascending ids) of the available workers
/// that the generated oracle labels symmetric.
inline std::optional<WorkerSet> brute_force_first_set(int n, const RampShape& shape,
                                                      const std::map<std::uint64_t, SymmetryRule>& symmetric,
                                                      const std::vector<bool>& available) {
    std::vector<int> pool;
    for (int w = 0; w < shape.num_workers(); ++w)
        if (available[static_cast<std::size_t>(w)]) pool.push_back(w);
    if (n < 1 || n > static_cast<int>(pool.size())) return std::nullopt;
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    const int m = static_cast<int>(pool.size());
    for (;;) {
        std::uint64_t mask = 0;
        for (int i : idx) mask |= std::uint64_t{1} << pool[static_cast<std::size_t>(i)];
        if (symmetric.count(mask)) return mask_to_set(mask);
        int i = n - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == m - n + i) --i;
        if (i < 0) return std::nullopt;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < n; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
}

// Realised-execution oracle --------------------------------------------------
//
// Runs a placed job iteration after iteration, each iteration starting once the
// previous one has fully drained, using a plain fixed-point dispatcher: at every
// event time, keep starting whatever is allowed until nothing changes. Returns
// the completion time of the last iteration.

inline Nanos realised_completion(const PartitionedJobGraph& pg, const Placement& pl, int iterations,
                                 const CommConfig& comm, const CollectiveModel& collective) {
    const auto& subs = pg.sub_ops();
    const auto& edges = pg.edges();
    const std::size_t n_sub = subs.size(), n_edge = edges.size();

    std::vector<Nanos> edge_time(n_edge, Nanos{0});
    std::vector<std::vector<ChannelKey>> edge_slots(n_edge);
    for (std::size_t e = 0; e < n_edge; ++e) {
        if (edges[e].kind == EdgeKind::collective || !pl.route[e]) continue;
        const auto& p = pl.route[e]->path;
        for (std::size_t h = 0; h + 1 < p.size(); ++h) edge_slots[e].push_back({p[h], p[h + 1], pl.route[e]->channel});
        edge_time[e] = to_nanos(path_transfer_time(edges[e].size, static_cast<int>(p.size()) - 1, comm));
    }

    Nanos t0{0};
    for (int it = 0; it < iterations; ++it) {
        std::vector<std::size_t> waiting(n_sub);
        for (std::uint32_t s = 0; s < n_sub; ++s)
            waiting[s] = pg.in_edges(s).size() + (s >= pg.num_forward() ? 1u : 0u);
        std::set<std::uint32_t> sub_ready, edge_ready;
        std::vector<bool> sub_done(n_sub, false);
        std::vector<int> backward_left(pg.origin().num_ops());
        for (std::size_t o = 0; o < backward_left.size(); ++o) backward_left[o] = pg.shards(o);
        std::map<WorkerId, bool> worker_busy;
        std::map<ChannelKey, bool> slot_busy;
        // (time, is_edge, id)
        std::multiset<std::tuple<std::int64_t, int, std::uint32_t>> running;
        Nanos end = t0;

        for (std::uint32_t s = 0; s < n_sub; ++s)
            if (waiting[s] == 0) sub_ready.insert(s);

        auto deliver = [&](std::uint32_t e, Nanos t) {
            end = std::max(end, t);
            if (--waiting[edges[e].dst] == 0) sub_ready.insert(edges[e].dst);
        };
        auto on_sub_done = [&](std::uint32_t s, Nanos t) {
            sub_done[s] = true;
            worker_busy[pl.sub_op_worker[s]] = false;
            end = std::max(end, t);
            const auto& sub = subs[s];
            if (sub.pass == Pass::forward) {
                if (--waiting[pg.twin(s)] == 0) sub_ready.insert(pg.twin(s));
            } else if (--backward_left[sub.op] == 0 && pg.shards(sub.op) > 1) {
                const int k = pg.shards(sub.op);
                end = std::max(end, t + to_nanos(collective(k, pg.origin().ops()[sub.op].memory / k, comm)));
            }
            for (auto e : pg.out_edges(s)) {
                if (edge_slots[e].empty())
                    deliver(e, t);
                else
                    edge_ready.insert(e);
            }
        };

        Nanos now = t0;
        for (;;) {
            bool changed = true;
            while (changed) {
                changed = false;
                // Workers: shortest ready sub-op first, ties by id.
                std::map<WorkerId, std::uint32_t> pick;
                for (auto s : sub_ready) {
                    const auto w = pl.sub_op_worker[s];
                    if (worker_busy[w]) continue;
                    auto it = pick.find(w);
                    if (it == pick.end() ||
                        std::make_pair(subs[s].duration, s) < std::make_pair(subs[it->second].duration, it->second))
                        pick[w] = s;
                }
                for (auto [w, s] : pick) {
                    sub_ready.erase(s);
                    worker_busy[w] = true;
                    running.insert({(now + subs[s].duration).count(), 0, s});
                    changed = true;
                }
                // Slots: an edge goes when it is the smallest waiting edge on
                // every slot it needs and all of them are idle.
                std::map<ChannelKey, std::uint32_t> head;
                for (auto e : edge_ready) {
                    for (const auto& k : edge_slots[e]) {
                        auto it = head.find(k);
                        if (it == head.end() ||
                            std::make_pair(edges[e].size, e) < std::make_pair(edges[it->second].size, it->second))
                            head[k] = e;
                    }
                }
                std::vector<std::uint32_t> launch;
                for (auto e : edge_ready) {
                    bool go = true;
                    for (const auto& k : edge_slots[e]) go = go && head[k] == e && !slot_busy[k];
                    if (go) launch.push_back(e);
                }
                for (auto e : launch) {
                    edge_ready.erase(e);
                    for (const auto& k : edge_slots[e]) slot_busy[k] = true;
                    running.insert({(now + edge_time[e]).count(), 1, e});
                    changed = true;
                }
            }
            if (running.empty()) break;
            now = Nanos{std::get<0>(*running.begin())};
            while (!running.empty() && std::get<0>(*running.begin()) == now.count()) {
                const auto [t, is_edge, id] = *running.begin();
                running.erase(running.begin());
                if (is_edge) {
                    for (const auto& k : edge_slots[id]) slot_busy[k] = false;
                    deliver(id, now);
                } else {
                    on_sub_done(id, now);
                }
            }
        }
        for (std::size_t s = 0; s < n_sub; ++s)
            if (!sub_done[s]) throw std::logic_error("oracle: sub-op never ran");
        t0 = end;
    }
    return t0;
}

}  // namespace rampsim::testing
