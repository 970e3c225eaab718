#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace ssr {

/*!
 * JSON experiment manifests for the ARL lab.
 *
 * A manifest is {"experiments": [...]} where each entry has a "type":
 *  - "gap_table": score, dist, tau, deltas, pairs [[zeta, h], ...], theta0?
 *  - "asymmetry": lambdas, zetas, limits? (one h per zeta), tau, arl0
 *  - "efficiency": score, targets, rank_limits (one h per target),
 *    normal_limits?, taus, deltas, arl0
 * plus optional "reps", "seed" and "label". Missing normal limits are
 * calibrated for a normal chart at arl0.
 */
nlohmann::json preset_manifest(std::string const& name);
std::vector<std::string> preset_names();

struct ExperimentOutput
{
  std::string text;
  nlohmann::json results;
};

ExperimentOutput run_manifest(nlohmann::json const& manifest);

}  // namespace ssr
