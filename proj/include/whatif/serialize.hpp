#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "whatif/baseline.hpp"
#include "whatif/building.hpp"
#include "whatif/dataset.hpp"
#include "whatif/discovery.hpp"
#include "whatif/estimation.hpp"
#include "whatif/graph.hpp"
#include "whatif/identify.hpp"

namespace whatif {

using nlohmann::json;

// Readers throw ValidationError naming the offending field.

json graph_to_json(const CausalGraph& g);
CausalGraph graph_from_json(const json& j);

json schema_to_json(const std::vector<ParameterSpec>& schema);
std::vector<ParameterSpec> schema_from_json(const json& j);

json constants_to_json(const OracleConstants& k);
OracleConstants constants_from_json(const json& j);

json knowledge_to_json(const KnowledgeConstraints& k);
KnowledgeConstraints knowledge_from_json(const json& j);

json path_to_json(const PathDiagnostic& p);
json estimand_to_json(const Estimand& e);

/// {cpdag, score, score_trajectory, operator_log, warnings, cache}
json discovery_to_json(const DiscoveryResult& r);

json scenario_to_json(const Scenario& s);
/// Accepts "treated" or "treat"; outcome defaults to Heating_Load.
Scenario scenario_from_json(const json& j);

/// tau, se (with its Monte Carlo and model parts), n, quantiles, a 40-bin
/// histogram and the cumulative curve sampled at 101 probability levels.
json effect_to_json(const EffectEstimate& e);

/// Per-node model summary: parents, degree, feature count, R², residual sd.
json scm_to_json(const FittedScm& scm);

json ensemble_to_json(const TreeEnsemble& m);
TreeEnsemble ensemble_from_json(const json& j);
json cv_to_json(const CvReport& r);

json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& j, const std::filesystem::path& path);

}  // namespace whatif
