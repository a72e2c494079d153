#include "rampsim/policies.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace rampsim {

int para_max(const Observation& obs) {
    for (int u = static_cast<int>(obs.action_mask.size()); u >= 1; --u)
        if (obs.mask_allows(u)) return u;
    return 0;
}

int para_min(const Observation& obs) {
    // β arrives as a double; recover its hundredths so 1/0.2 is exactly 5.
    const auto hundredths = std::lround(obs.global_job[gj_beta_raw] * 100.0);
    if (hundredths < 1) throw std::invalid_argument("para_min: observation carries a nonpositive beta");
    const int target = static_cast<int>((100 + hundredths - 1) / hundredths);
    for (int u = target; u <= static_cast<int>(obs.action_mask.size()); ++u)
        if (obs.mask_allows(u)) return u;
    return para_max(obs);
}

int random_action(const Observation& obs, Rng& rng) {
    std::vector<int> allowed;
    for (int u = 1; u <= static_cast<int>(obs.action_mask.size()); ++u)
        if (obs.mask_allows(u)) allowed.push_back(u);
    if (allowed.empty()) return 0;
    return allowed[uniform_index(rng, allowed.size())];
}

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names{"para_max", "para_min", "random"};
    return names;
}

Policy make_policy(const PolicySpec& spec, std::uint64_t episode_seed) {
    if (spec.name == "para_max") return para_max;
    if (spec.name == "para_min") return para_min;
    if (spec.name == "random") {
        std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                          static_cast<std::uint32_t>(episode_seed), static_cast<std::uint32_t>(episode_seed >> 32)};
        auto rng = std::make_shared<Rng>(seq);
        return [rng](const Observation& obs) { return random_action(obs, *rng); };
    }
    throw std::invalid_argument("unknown policy '" + spec.name + "'");
}

}  // namespace rampsim
