#pragma once

// Discrete distributions over the deadline slack β, held in hundredths.

#include <string>
#include <string_view>
#include <vector>

#include "rampsim/rng.hpp"

namespace rampsim {

class Record;

struct BetaSpec {
    std::string name = "A";
    std::vector<int> values;  // hundredths, ascending, in [1, 100]
    std::vector<double> probabilities;

    /// Throws std::invalid_argument unless probabilities are nonnegative,
    /// sum to 1 and the support lies in (0, 1].
    void validate() const;
    int sample(Rng& rng) const;
    int max_value() const;
    double mean() const;

    /// Named presets A-D:
    ///   A  uniform over 0.05, 0.10, ..., 1.00
    ///   B  demanding, mass at low β
    ///   C  bimodal, a low cluster and a high cluster
    ///   D  lenient, mass near 1
    static BetaSpec preset(std::string_view name);
    static BetaSpec constant(int hundredths);

    /// `beta name=X` followed by one `beta_point value= p=` record per entry.
    std::vector<Record> to_records() const;
};

/// Parses `beta preset=X` alone, or `beta name=X` plus `beta_point` records.
BetaSpec beta_from_records(const std::vector<Record>& records);

}  // namespace rampsim
