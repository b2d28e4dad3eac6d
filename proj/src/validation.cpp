#include "whatif/validation.hpp"

#include <algorithm>
#include <optional>
#include <random>

#include "whatif/error.hpp"

namespace whatif {

namespace {

constexpr std::size_t kMaxRejections = 1000000;

}  // namespace

std::vector<BuildingConfig> sample_conditioned_configs(const std::vector<ParameterSpec>& schema,
                                                       const Assignment& conditions, std::size_t n,
                                                       std::uint64_t seed) {
    std::optional<double> wwr;
    for (const auto& [name, value] : conditions) {
        if (name == col::kWwr) {
            wwr = value;
            continue;
        }
        const auto it = std::find_if(schema.begin(), schema.end(), [&](const ParameterSpec& p) { return p.name == name; });
        if (it == schema.end())
            throw ValidationError("oracle conditions must be sampled parameters or WWR, got " + name);
        if (!it->contains(value)) throw ValidationError("condition " + name + " outside its bounds");
    }

    std::vector<BuildingConfig> configs = sample_configs(schema, n, seed);
    for (auto& c : configs)
        for (const auto& [name, value] : conditions)
            if (name != col::kWwr) c.set(name, value);
    if (!wwr) return configs;

    const std::string_view dirs[] = {col::kWwrNorth, col::kWwrEast, col::kWwrSouth, col::kWwrWest};
    std::vector<const ParameterSpec*> spec;
    for (auto d : dirs) {
        const auto it = std::find_if(schema.begin(), schema.end(), [&](const ParameterSpec& p) { return p.name == d; });
        spec.push_back(&*it);
        if (conditions.count(std::string(d)))
            throw ValidationError("WWR cannot be conditioned together with a directional ratio");
    }
    std::mt19937_64 rng(seed ^ 0x57575257ull);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& c : configs) {
        std::size_t tries = 0;
        for (;; ++tries) {
            if (tries == kMaxRejections) throw ValidationError("WWR condition cannot be met within the directional bounds");
            double vals[4];
            double sum = 0;
            for (int k = 0; k < 3; ++k) {
                vals[k] = spec[k]->min + unit(rng) * (spec[k]->max - spec[k]->min);
                sum += vals[k];
            }
            vals[3] = 4.0 * *wwr - sum;
            if (!spec[3]->contains(vals[3])) continue;
            for (int k = 0; k < 4; ++k) c.set(dirs[k], vals[k]);
            break;
        }
    }
    return configs;
}

EffectEstimate oracle_effect(const std::vector<ParameterSpec>& schema, const OracleConstants& constants,
                             const Scenario& s, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ValidationError("oracle sample count must be at least 1");
    if (!BuildingConfig::has_field(s.treatment))
        throw ValidationError("oracle treatment must be a sampled parameter, got " + s.treatment);
    if (s.outcome != col::kHeatingLoad) throw ValidationError("oracle outcome must be Heating_Load");
    const auto configs = sample_conditioned_configs(schema, s.conditions, n, seed);
    std::vector<double> effects;
    effects.reserve(configs.size());
    for (const auto& c : configs) effects.push_back(paired_effect(c, s.treatment, s.control, s.treated, constants));
    return summarize_effects(std::move(effects));
}

}  // namespace whatif
