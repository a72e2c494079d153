#pragma once

#include <string>
#include <vector>

#include "rampsim/env.hpp"

namespace rampsim {

/// Largest action the mask allows, else 0.
int para_max(const Observation& obs);

/// ceil(1 / β) rounded up to the nearest allowed action; the largest allowed
/// action when none is that big; 0 when nothing is allowed.
int para_min(const Observation& obs);

/// Uniform over allowed nonzero actions; 0 when nothing is allowed.
int random_action(const Observation& obs, Rng& rng);

struct PolicySpec {
    std::string name;  // para_max | para_min | random
    std::uint64_t seed = 0;
};

const std::vector<std::string>& policy_names();
/// A fresh policy instance. Random policies draw from a generator seeded by
/// (spec.seed, episode_seed). Throws std::invalid_argument on unknown names.
Policy make_policy(const PolicySpec& spec, std::uint64_t episode_seed);

}  // namespace rampsim
