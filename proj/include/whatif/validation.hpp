#pragma once

#include <cstdint>
#include <vector>

#include "whatif/building.hpp"
#include "whatif/dataset.hpp"
#include "whatif/estimation.hpp"

namespace whatif {

/// Configurations drawn from the schema with the scenario's conditions
/// imposed. Conditions may pin sampled parameters and the WWR aggregate;
/// a WWR condition is met by drawing three directional ratios uniformly,
/// solving for the fourth and rejecting draws outside its bounds.
std::vector<BuildingConfig> sample_conditioned_configs(const std::vector<ParameterSpec>& schema,
                                                       const Assignment& conditions, std::size_t n,
                                                       std::uint64_t seed);

/// Ground truth for a scenario: paired oracle runs over `n` conditioned
/// configurations, summarized like an estimate.
EffectEstimate oracle_effect(const std::vector<ParameterSpec>& schema, const OracleConstants& constants,
                             const Scenario& scenario, std::size_t n, std::uint64_t seed);

}  // namespace whatif
