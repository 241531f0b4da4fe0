#ifndef HONEST_ATE_SERIALIZE_HPP
#define HONEST_ATE_SERIALIZE_HPP

#include <string>

#include <json.hpp>

#include "honest_ate/data.hpp"
#include "honest_ate/solution_path.hpp"

namespace honest_ate {

using json = nlohmann::json;

// Round-trip JSON forms of the core domain types.
json to_json(const Sample& sample);
Sample sample_from_json(const json& j);
json to_json(const NormSpec& norm);
NormSpec norm_from_json(const json& j);
json to_json(const LipschitzSpec& spec);
LipschitzSpec lipschitz_from_json(const json& j);
json to_json(const TargetWeights& target);
TargetWeights target_from_json(const json& j);
json to_json(const VarianceSpec& spec);
VarianceSpec variance_from_json(const json& j);

/// Versioned archive of a traced path (knot summaries plus the event log;
/// replay checkpoints are rebuilt on load).
json path_to_json(const SolutionPath& path);
SolutionPath path_from_json(const json& j);

/// Content hash of everything the homotopy depends on: covariates,
/// treatments, norm, target and arm variances. Used as the cache key.
std::string path_cache_key(const Sample& sample, const NormSpec& norm,
                           const TargetWeights& target, double sigma2_control,
                           double sigma2_treated);

}  // namespace honest_ate

#endif  // HONEST_ATE_SERIALIZE_HPP
