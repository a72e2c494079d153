#include "rampsim/topology.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "rampsim/text_record.hpp"

namespace rampsim {

void RampShape::validate() const {
    if (n_c < 1 || n_r < 1 || n_s < 1) throw std::invalid_argument("RAMP shape components must be >= 1");
}

WorkerId worker_id(const WorkerCoord& w, const RampShape& shape) {
    if (w.c < 0 || w.c >= shape.n_c || w.r < 0 || w.r >= shape.n_r || w.s < 0 || w.s >= shape.n_s)
        throw std::out_of_range("worker coordinate (" + std::to_string(w.c) + "," + std::to_string(w.r) + "," +
                                std::to_string(w.s) + ") outside shape");
    return (w.c * shape.n_r + w.r) * shape.n_s + w.s;
}

WorkerCoord worker_coord(WorkerId id, const RampShape& shape) {
    if (id < 0 || id >= shape.num_workers()) throw std::out_of_range("worker id " + std::to_string(id) + " outside shape");
    return {id / (shape.n_r * shape.n_s), (id / shape.n_s) % shape.n_r, id % shape.n_s};
}

const char* to_string(SymmetryRule r) {
    switch (r) {
        case SymmetryRule::none: return "none";
        case SymmetryRule::singleton: return "singleton";
        case SymmetryRule::multi_rack: return "rule1";
        case SymmetryRule::single_rack: return "rule2";
        case SymmetryRule::one_per_rack: return "rule3";
    }
    return "?";
}

SymmetryVerdict is_symmetric(std::span<const WorkerCoord> set, const RampShape& shape) {
    if (set.empty()) throw std::invalid_argument("is_symmetric: empty worker set");
    for (const auto& w : set) (void)worker_id(w, shape);

    std::set<WorkerCoord> distinct(set.begin(), set.end());
    if (distinct.size() != set.size()) return {};
    if (set.size() == 1) return {true, SymmetryRule::singleton};

    std::map<int, std::vector<int>> groups_by_rack;
    for (const auto& w : set) groups_by_rack[w.r].push_back(w.c);
    auto distinct_count = [](std::vector<int> v) {
        std::sort(v.begin(), v.end());
        return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
    };

    if (groups_by_rack.size() == 1) {
        const auto& g = groups_by_rack.begin()->second;
        return distinct_count(g) == g.size() ? SymmetryVerdict{true, SymmetryRule::single_rack} : SymmetryVerdict{};
    }
    const auto per_rack = groups_by_rack.begin()->second.size();
    for (const auto& [r, g] : groups_by_rack)
        if (g.size() != per_rack) return {};
    if (per_rack == 1) {
        std::vector<int> all;
        for (const auto& w : set) all.push_back(w.c);
        return distinct_count(all) == all.size() ? SymmetryVerdict{true, SymmetryRule::one_per_rack} : SymmetryVerdict{};
    }
    const auto racks = groups_by_rack.size();
    for (const auto& [r, g] : groups_by_rack)
        if (distinct_count(g) < racks) return {};
    return {true, SymmetryRule::multi_rack};
}

SymmetryVerdict is_symmetric_ids(std::span<const WorkerId> set, const RampShape& shape) {
    std::vector<WorkerCoord> coords;
    coords.reserve(set.size());
    for (auto w : set) coords.push_back(worker_coord(w, shape));
    return is_symmetric(coords, shape);
}

namespace {

struct Candidate {
    SymmetryRule rule;
    int racks;
    int per_rack;
};

std::vector<Candidate> candidate_shapes(int n, const RampShape& shape) {
    std::vector<Candidate> out;
    if (n >= 2 && n <= shape.n_c) out.push_back({SymmetryRule::single_rack, 1, n});
    if (n >= 2 && n <= std::min(shape.n_r, shape.n_c)) out.push_back({SymmetryRule::one_per_rack, n, 1});
    const int rack_capacity = shape.n_c * shape.n_s;
    for (int racks = 2; racks <= std::min(shape.n_r, shape.n_c); ++racks) {
        if (n % racks != 0) continue;
        const int per_rack = n / racks;
        if (per_rack >= 2 && per_rack >= racks && per_rack <= rack_capacity)
            out.push_back({SymmetryRule::multi_rack, racks, per_rack});
    }
    return out;
}

// Kuhn's augmenting-path matching on a small dense bipartite graph.
int max_matching(const std::vector<std::vector<bool>>& adj, int right) {
    std::vector<int> match(static_cast<std::size_t>(right), -1);
    int size = 0;
    for (std::size_t u = 0; u < adj.size(); ++u) {
        std::vector<bool> seen(static_cast<std::size_t>(right), false);
        std::function<bool(std::size_t)> augment = [&](std::size_t x) -> bool {
            for (int v = 0; v < right; ++v) {
                if (!adj[x][static_cast<std::size_t>(v)] || seen[static_cast<std::size_t>(v)]) continue;
                seen[static_cast<std::size_t>(v)] = true;
                auto& m = match[static_cast<std::size_t>(v)];
                if (m < 0 || augment(static_cast<std::size_t>(m))) {
                    m = static_cast<int>(x);
                    return true;
                }
            }
            return false;
        };
        if (augment(u)) ++size;
    }
    return size;
}

class SetSearch {
public:
    SetSearch(const RampShape& shape, std::vector<bool> available) : shape_(shape), available_(std::move(available)) {
        const int n = shape.num_workers();
        rack_.resize(static_cast<std::size_t>(n));
        group_.resize(static_cast<std::size_t>(n));
        for (int w = 0; w < n; ++w) {
            auto c = worker_coord(w, shape);
            rack_[static_cast<std::size_t>(w)] = c.r;
            group_[static_cast<std::size_t>(w)] = c.c;
        }
    }

    std::optional<WorkerSet> lex_first(const Candidate& cand, int n) const {
        WorkerSet chosen;
        if (!feasible(cand, n, chosen, -1)) return std::nullopt;
        for (int pos = 0; pos < n; ++pos) {
            const int last = chosen.empty() ? -1 : chosen.back();
            bool placed = false;
            for (int w = last + 1; w < shape_.num_workers(); ++w) {
                if (!available_[static_cast<std::size_t>(w)]) continue;
                chosen.push_back(w);
                if (feasible(cand, n, chosen, w)) {
                    placed = true;
                    break;
                }
                chosen.pop_back();
            }
            if (!placed) return std::nullopt;
        }
        return chosen;
    }

    // Whether `chosen` extends to a size-n set of shape `cand` using only
    // available workers with id > last.
    bool feasible(const Candidate& cand, int n, const WorkerSet& chosen, int last) const {
        const int racks = shape_.n_r, groups = shape_.n_c;
        // pool[r][c] = number of usable workers at (c, r) beyond `last`.
        std::vector<std::vector<int>> pool(static_cast<std::size_t>(racks), std::vector<int>(static_cast<std::size_t>(groups), 0));
        for (int w = last + 1; w < shape_.num_workers(); ++w)
            if (available_[static_cast<std::size_t>(w)]) ++pool[rack(w)][group(w)];
        std::vector<int> rack_count(static_cast<std::size_t>(racks), 0);
        std::vector<std::set<int>> rack_groups(static_cast<std::size_t>(racks));
        std::set<int> all_groups;
        for (auto w : chosen) {
            ++rack_count[rack(w)];
            rack_groups[rack(w)].insert(group_[static_cast<std::size_t>(w)]);
            all_groups.insert(group_[static_cast<std::size_t>(w)]);
        }
        const int used_racks = static_cast<int>(std::count_if(rack_count.begin(), rack_count.end(), [](int x) { return x > 0; }));
        const int have = static_cast<int>(chosen.size());
        const int need = n - have;

        switch (cand.rule) {
            case SymmetryRule::single_rack: {
                if (static_cast<int>(all_groups.size()) != have || used_racks > 1) return false;
                for (int r = 0; r < racks; ++r) {
                    if (used_racks == 1 && rack_count[static_cast<std::size_t>(r)] == 0) continue;
                    int fresh = 0;
                    for (int c = 0; c < groups; ++c)
                        if (pool[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] > 0 && !all_groups.count(c)) ++fresh;
                    if (fresh >= need) return true;
                }
                return false;
            }
            case SymmetryRule::one_per_rack: {
                if (static_cast<int>(all_groups.size()) != have || used_racks != have) return false;
                std::vector<std::vector<bool>> adj;
                for (int r = 0; r < racks; ++r) {
                    if (rack_count[static_cast<std::size_t>(r)] > 0) continue;
                    std::vector<bool> row(static_cast<std::size_t>(groups), false);
                    for (int c = 0; c < groups; ++c)
                        row[static_cast<std::size_t>(c)] = pool[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] > 0 && !all_groups.count(c);
                    adj.push_back(std::move(row));
                }
                return max_matching(adj, groups) >= need;
            }
            case SymmetryRule::multi_rack: {
                if (used_racks > cand.racks) return false;
                int fresh_racks = 0;
                for (int r = 0; r < racks; ++r) {
                    const auto& row = pool[static_cast<std::size_t>(r)];
                    const int cnt = rack_count[static_cast<std::size_t>(r)];
                    if (cnt > cand.per_rack) return false;
                    const auto& held = rack_groups[static_cast<std::size_t>(r)];
                    int supply = 0, new_groups = 0;
                    for (int c = 0; c < groups; ++c) {
                        supply += row[static_cast<std::size_t>(c)];
                        if (row[static_cast<std::size_t>(c)] > 0 && !held.count(c)) ++new_groups;
                    }
                    const int more = cand.per_rack - cnt;
                    const int missing = std::max(0, cand.racks - static_cast<int>(held.size()));
                    const bool ok = supply >= more && more >= missing && new_groups >= missing;
                    if (cnt > 0 && !ok) return false;
                    if (cnt == 0 && ok) ++fresh_racks;
                }
                return fresh_racks >= cand.racks - used_racks;
            }
            default: return false;
        }
    }

private:
    std::size_t rack(int w) const { return static_cast<std::size_t>(rack_[static_cast<std::size_t>(w)]); }
    std::size_t group(int w) const { return static_cast<std::size_t>(group_[static_cast<std::size_t>(w)]); }

    const RampShape& shape_;
    std::vector<bool> available_;
    std::vector<int> rack_, group_;
};

}  // namespace

std::optional<WorkerSet> find_symmetric_set(int n, const RampShape& shape, std::span<const double> free_memory,
                                            double mem_per_worker) {
    if (n < 1) throw std::invalid_argument("find_symmetric_set: n must be >= 1");
    const int total = shape.num_workers();
    if (static_cast<int>(free_memory.size()) != total)
        throw std::invalid_argument("find_symmetric_set: free_memory size does not match shape");
    std::vector<bool> available(static_cast<std::size_t>(total));
    for (int w = 0; w < total; ++w) {
        const double f = free_memory[static_cast<std::size_t>(w)];
        available[static_cast<std::size_t>(w)] = f >= 0.0 && f >= mem_per_worker;
    }
    if (n == 1) {
        for (int w = 0; w < total; ++w)
            if (available[static_cast<std::size_t>(w)]) return WorkerSet{w};
        return std::nullopt;
    }
    SetSearch search(shape, std::move(available));
    std::optional<WorkerSet> best;
    for (const auto& cand : candidate_shapes(n, shape)) {
        auto found = search.lex_first(cand, n);
        if (found && (!best || *found < *best)) best = std::move(found);
    }
    return best;
}

bool shape_admits_size(const RampShape& shape, int n) {
    if (n < 1 || n > shape.num_workers()) return false;
    if (n == 1) return true;
    SetSearch search(shape, std::vector<bool>(static_cast<std::size_t>(shape.num_workers()), true));
    for (const auto& cand : candidate_shapes(n, shape))
        if (search.feasible(cand, n, {}, -1)) return true;
    return false;
}

// Paths ------------------------------------------------------------------------

std::vector<Path> k_shortest_paths(WorkerId src, WorkerId dst, int k, const RampShape& shape) {
    const int n = shape.num_workers();
    if (src < 0 || src >= n || dst < 0 || dst >= n) throw std::out_of_range("k_shortest_paths: worker out of range");
    if (src == dst) throw std::invalid_argument("k_shortest_paths: src == dst");
    std::vector<Path> out;
    if (k < 1) return out;
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    used[static_cast<std::size_t>(src)] = used[static_cast<std::size_t>(dst)] = true;
    Path cur{src};
    // Depth-first in ascending neighbour order yields lexicographic order
    // among paths of one hop count.
    std::function<void(int)> extend = [&](int remaining) {
        if (static_cast<int>(out.size()) >= k) return;
        if (remaining == 0) {
            Path p = cur;
            p.push_back(dst);
            out.push_back(std::move(p));
            return;
        }
        for (int w = 0; w < n && static_cast<int>(out.size()) < k; ++w) {
            if (used[static_cast<std::size_t>(w)]) continue;
            used[static_cast<std::size_t>(w)] = true;
            cur.push_back(w);
            extend(remaining - 1);
            cur.pop_back();
            used[static_cast<std::size_t>(w)] = false;
        }
    };
    for (int hops = 1; hops < n && static_cast<int>(out.size()) < k; ++hops) extend(hops - 1);
    if (out.empty()) throw std::logic_error("k_shortest_paths: disconnected pair");
    return out;
}

// Communication model ------------------------------------------------------------

CommConfig CommConfig::for_shape(const RampShape& shape, double total_node_bandwidth) {
    CommConfig c;
    c.total_node_bandwidth = total_node_bandwidth;
    c.per_transceiver_bandwidth = total_node_bandwidth / shape.n_c;
    c.channels_per_link = shape.n_c;
    return c;
}

void CommConfig::validate(const RampShape& shape) const {
    if (!(total_node_bandwidth > 0.0) || !(per_transceiver_bandwidth > 0.0))
        throw std::invalid_argument("bandwidths must be > 0");
    if (propagation_latency < 0.0 || ocs_reconfig_latency < 0.0 || io_latency < 0.0)
        throw std::invalid_argument("latencies must be >= 0");
    if (channels_per_link < 1) throw std::invalid_argument("channels_per_link must be >= 1");
    const double expect = total_node_bandwidth / shape.n_c;
    if (std::abs(per_transceiver_bandwidth - expect) > 1e-9 * expect)
        throw std::invalid_argument("per_transceiver_bandwidth must equal total_node_bandwidth / N_C");
}

double transfer_time(double size, const CommConfig& cfg) {
    if (size <= 0.0) return 0.0;
    return cfg.io_latency + cfg.propagation_latency + cfg.ocs_reconfig_latency + size / cfg.per_transceiver_bandwidth;
}

double path_transfer_time(double size, int hops, const CommConfig& cfg) {
    if (size <= 0.0) return 0.0;
    return transfer_time(size, cfg) + (hops - 1) * (cfg.propagation_latency + cfg.io_latency);
}

double collective_time(int participants, double per_member_size, const CommConfig& cfg) {
    if (participants < 2) throw std::invalid_argument("collective_time: need at least two participants");
    const double step = cfg.io_latency + cfg.propagation_latency + cfg.ocs_reconfig_latency +
                        std::max(per_member_size, 0.0) / cfg.per_transceiver_bandwidth;
    return 2.0 * step;
}

// Cluster ------------------------------------------------------------------------

void ClusterConfig::validate() const {
    shape.validate();
    comm.validate(shape);
    if (!(memory_capacity > 0.0)) throw std::invalid_argument("memory_capacity must be > 0");
    if (!(flops > 0.0)) throw std::invalid_argument("flops must be > 0");
    if (k_paths < 1) throw std::invalid_argument("k_paths must be >= 1");
}

Record ClusterConfig::to_record() const {
    Record r("cluster");
    r.add("n_c", shape.n_c)
        .add("n_r", shape.n_r)
        .add("n_s", shape.n_s)
        .add("memory_capacity", memory_capacity)
        .add("flops", flops)
        .add("total_node_bandwidth", comm.total_node_bandwidth)
        .add("propagation_latency", comm.propagation_latency)
        .add("ocs_reconfig_latency", comm.ocs_reconfig_latency)
        .add("io_latency", comm.io_latency)
        .add("channels_per_link", comm.channels_per_link)
        .add("k_paths", k_paths);
    return r;
}

ClusterConfig ClusterConfig::from_record(const Record& r) {
    ClusterConfig c;
    c.shape.n_c = static_cast<int>(r.get_int_or("n_c", c.shape.n_c));
    c.shape.n_r = static_cast<int>(r.get_int_or("n_r", c.shape.n_r));
    c.shape.n_s = static_cast<int>(r.get_int_or("n_s", c.shape.n_s));
    c.shape.validate();
    c.memory_capacity = r.get_double_or("memory_capacity", c.memory_capacity);
    c.flops = r.get_double_or("flops", c.flops);
    c.comm = CommConfig::for_shape(c.shape, r.get_double_or("total_node_bandwidth", 1.6e12));
    c.comm.propagation_latency = r.get_double_or("propagation_latency", c.comm.propagation_latency);
    c.comm.ocs_reconfig_latency = r.get_double_or("ocs_reconfig_latency", c.comm.ocs_reconfig_latency);
    c.comm.io_latency = r.get_double_or("io_latency", c.comm.io_latency);
    c.comm.channels_per_link = static_cast<int>(r.get_int_or("channels_per_link", c.shape.n_c));
    c.k_paths = static_cast<int>(r.get_int_or("k_paths", c.k_paths));
    c.validate();
    return c;
}

ClusterConfig load_cluster_config(const std::string& path) {
    for (const auto& r : read_records_file(path))
        if (r.kind() == "cluster") return ClusterConfig::from_record(r);
    throw ParseError(path + ": no cluster record");
}

ClusterState::ClusterState(ClusterConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const auto n = static_cast<std::size_t>(num_workers());
    owner_.assign(n, std::nullopt);
    memory_used_.assign(n, 0.0);
    channel_owner_.assign(n * n * static_cast<std::size_t>(cfg_.comm.channels_per_link), std::nullopt);
}

std::size_t ClusterState::channel_index(const ChannelKey& key) const {
    const int n = num_workers();
    if (key.src < 0 || key.src >= n || key.dst < 0 || key.dst >= n || key.channel < 0 ||
        key.channel >= cfg_.comm.channels_per_link)
        throw std::out_of_range("channel key out of range");
    return (static_cast<std::size_t>(key.src) * static_cast<std::size_t>(n) + static_cast<std::size_t>(key.dst)) *
               static_cast<std::size_t>(cfg_.comm.channels_per_link) +
           static_cast<std::size_t>(key.channel);
}

std::optional<JobId> ClusterState::channel_owner(const ChannelKey& key) const {
    return channel_owner_[channel_index(key)];
}

std::vector<double> ClusterState::free_memory_view() const {
    std::vector<double> out(static_cast<std::size_t>(num_workers()));
    for (int w = 0; w < num_workers(); ++w)
        out[static_cast<std::size_t>(w)] = owner_[static_cast<std::size_t>(w)] ? -1.0 : free_memory(w);
    return out;
}

int ClusterState::free_workers() const {
    return static_cast<int>(std::count(owner_.begin(), owner_.end(), std::nullopt));
}

void ClusterState::reserve(Reservation r) {
    for (const auto& [w, bytes] : r.memory) {
        if (w < 0 || w >= num_workers()) throw std::out_of_range("reservation worker out of range");
        if (owner_[static_cast<std::size_t>(w)])
            throw std::logic_error("worker " + std::to_string(w) + " already reserved");
    }
    std::map<WorkerId, double> per_worker;
    for (const auto& [w, bytes] : r.memory) per_worker[w] += bytes;
    for (const auto& [w, bytes] : per_worker)
        if (memory_used(w) + bytes > cfg_.memory_capacity * (1.0 + 1e-12))
            throw std::logic_error("worker " + std::to_string(w) + " memory overflow");
    for (const auto& key : r.channels)
        if (channel_owner_[channel_index(key)]) throw std::logic_error("channel already reserved");
    for (const auto& [w, bytes] : per_worker) {
        owner_[static_cast<std::size_t>(w)] = r.job;
        memory_used_[static_cast<std::size_t>(w)] += bytes;
    }
    for (const auto& key : r.channels) channel_owner_[channel_index(key)] = r.job;
    reservations_.push_back(std::move(r));
}

Reservation ClusterState::release(JobId job) {
    auto it = std::find_if(reservations_.begin(), reservations_.end(), [&](const auto& r) { return r.job == job; });
    if (it == reservations_.end()) throw std::out_of_range("no reservation for job " + std::to_string(job));
    Reservation r = std::move(*it);
    reservations_.erase(it);
    std::map<WorkerId, double> per_worker;
    for (const auto& [w, bytes] : r.memory) per_worker[w] += bytes;
    for (const auto& [w, bytes] : per_worker) {
        owner_[static_cast<std::size_t>(w)].reset();
        memory_used_[static_cast<std::size_t>(w)] = std::max(0.0, memory_used_[static_cast<std::size_t>(w)] - bytes);
        if (memory_used_[static_cast<std::size_t>(w)] < 1e-6) memory_used_[static_cast<std::size_t>(w)] = 0.0;
    }
    for (const auto& key : r.channels) channel_owner_[channel_index(key)].reset();
    return r;
}

}  // namespace rampsim
