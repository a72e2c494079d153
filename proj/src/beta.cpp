#include "rampsim/beta.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rampsim/text_record.hpp"

namespace rampsim {

void BetaSpec::validate() const {
    if (values.empty() || values.size() != probabilities.size())
        throw std::invalid_argument("beta table '" + name + "': values and probabilities must be nonempty and aligned");
    double total = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 1 || values[i] > 100)
            throw std::invalid_argument("beta table '" + name + "': value outside (0, 1]");
        if (i > 0 && values[i] <= values[i - 1])
            throw std::invalid_argument("beta table '" + name + "': values must be strictly ascending");
        if (!(probabilities[i] >= 0.0)) throw std::invalid_argument("beta table '" + name + "': negative probability");
        total += probabilities[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("beta table '" + name + "': probabilities sum to " + format_double(total));
}

int BetaSpec::sample(Rng& rng) const { return values[weighted_index(rng, probabilities)]; }

int BetaSpec::max_value() const {
    int best = 0;
    for (std::size_t i = 0; i < values.size(); ++i)
        if (probabilities[i] > 0.0) best = std::max(best, values[i]);
    return best;
}

double BetaSpec::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) m += probabilities[i] * values[i] / 100.0;
    return m;
}

namespace {

BetaSpec from_weights(std::string name, std::vector<std::pair<int, double>> table) {
    BetaSpec b;
    b.name = std::move(name);
    double total = 0.0;
    for (const auto& [v, w] : table) total += w;
    for (const auto& [v, w] : table) {
        b.values.push_back(v);
        b.probabilities.push_back(w / total);
    }
    b.validate();
    return b;
}

}  // namespace

BetaSpec BetaSpec::preset(std::string_view name) {
    if (name == "A") {
        std::vector<std::pair<int, double>> t;
        for (int v = 5; v <= 100; v += 5) t.emplace_back(v, 1.0);
        return from_weights("A", std::move(t));
    }
    if (name == "B")
        return from_weights("B", {{6, 1}, {7, 3}, {8, 3}, {9, 2}, {10, 2}, {12, 1}});
    if (name == "C")
        return from_weights("C", {{10, 2}, {15, 3}, {20, 3}, {25, 2}, {80, 2}, {85, 3}, {90, 3}, {95, 2}});
    if (name == "D")
        return from_weights("D", {{70, 1}, {80, 2}, {85, 2}, {90, 3}, {95, 4}, {100, 5}});
    throw std::invalid_argument("unknown beta preset '" + std::string(name) + "'");
}

BetaSpec BetaSpec::constant(int hundredths) {
    BetaSpec b;
    b.name = "const" + std::to_string(hundredths);
    b.values = {hundredths};
    b.probabilities = {1.0};
    b.validate();
    return b;
}

std::vector<Record> BetaSpec::to_records() const {
    std::vector<Record> out;
    out.push_back(Record("beta").add_string("name", name));
    for (std::size_t i = 0; i < values.size(); ++i)
        out.push_back(Record("beta_point").add("value", values[i] / 100.0).add("p", probabilities[i]));
    return out;
}

BetaSpec beta_from_records(const std::vector<Record>& records) {
    std::optional<BetaSpec> spec;
    for (const auto& r : records) {
        if (r.kind() == "beta") {
            if (auto p = r.find("preset")) return BetaSpec::preset(unescape_value(*p));
            spec.emplace();
            spec->name = r.get_string("name");
        } else if (r.kind() == "beta_point") {
            if (!spec) throw ParseError("beta_point before beta record");
            const double v = r.get_double("value");
            const auto h = std::lround(v * 100.0);
            if (std::abs(v * 100.0 - static_cast<double>(h)) > 1e-6)
                throw ParseError("beta value " + format_double(v) + " is not a multiple of 0.01");
            spec->values.push_back(static_cast<int>(h));
            spec->probabilities.push_back(r.get_double("p"));
        }
    }
    if (!spec) throw ParseError("no beta record");
    spec->validate();
    return *spec;
}

}  // namespace rampsim
