#include "ssr/experiments.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "ssr/arl_lab.hpp"
#include "ssr/calibrate.hpp"
#include "ssr/error.hpp"

namespace ssr {
namespace {

using nlohmann::json;

std::vector<double> const kGapDeltas{0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 1.0, 1.25, 1.5};

json gap_experiment(char const* dist, json pairs, std::size_t tau)
{
  return {{"type", "gap_table"},
          {"score", "w"},
          {"dist", dist},
          {"tau", tau},
          {"deltas", kGapDeltas},
          {"pairs", std::move(pairs)}};
}

json gap_manifest(std::size_t tau)
{
  json normal_pairs = json::array({json::array({0.10, 12.01}), json::array({0.25, 7.25})});
  json t3_pairs = json::array({json::array({0.15, 9.86}), json::array({0.35, 5.66})});
  return {{"reps", 10'000},
          {"seed", 1},
          {"experiments",
           json::array({gap_experiment("normal", normal_pairs, tau), gap_experiment("t3", t3_pairs, tau)})}};
}

OocOptions options_from(json const& j, std::uint64_t stream)
{
  OocOptions o;
  o.replications = j.value("reps", std::size_t{10'000});
  o.seed = j.value("seed", std::uint64_t{1});
  o.stream = stream;
  return o;
}

json estimate_json(OocArlEstimate const& e)
{
  return {{"arl", e.arl}, {"se", e.standard_error}, {"used", e.used}, {"discarded", e.discarded}};
}

ExperimentOutput run_gap(json const& spec, OocOptions const& options)
{
  auto const kind = parse_score_kind(spec.value("score", std::string("w")));
  auto const dist = Distribution::parse(spec.at("dist").get<std::string>());
  std::vector<ReferencePair> pairs;
  for (auto const& p : spec.at("pairs"))
    pairs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  std::optional<double> theta0_override;
  if (spec.contains("theta0"))
    theta0_override = spec.at("theta0").get<double>();
  auto table = heuristic_gap_table(kind,
                                   dist,
                                   spec.at("deltas").get<std::vector<double>>(),
                                   pairs,
                                   spec.at("tau").get<std::size_t>(),
                                   options,
                                   theta0_override);
  json rows = json::array();
  for (std::size_t d = 0; d < table.deltas.size(); ++d)
  {
    for (std::size_t p = 0; p < pairs.size(); ++p)
    {
      auto const& c = table.cells[d][p];
      rows.push_back({{"delta", table.deltas[d]},
                      {"zeta", pairs[p].zeta},
                      {"h", pairs[p].h},
                      {"rank_chart", estimate_json(c.ssr)},
                      {"normal_chart", estimate_json(c.normal)},
                      {"gap", c.gap}});
    }
  }
  return {table.to_text(),
          {{"type", "gap_table"}, {"dist", table.distribution}, {"theta0", table.theta0}, {"tau", table.tau}, {"cells", rows}}};
}

ExperimentOutput run_asymmetry(json const& spec, OocOptions const& options)
{
  auto const lambdas = spec.at("lambdas").get<std::vector<double>>();
  auto const zetas = spec.at("zetas").get<std::vector<double>>();
  auto const tau = spec.value("tau", std::size_t{50});
  std::vector<double> limits;
  if (spec.contains("limits"))
  {
    limits = spec.at("limits").get<std::vector<double>>();
    if (limits.size() != zetas.size())
      throw ConfigError("asymmetry: need one limit per zeta");
  }
  else
  {
    TwoSidedLimitSettings settings;
    settings.arl0 = spec.value("arl0", 500.0);
    settings.seed = options.seed;
    for (double z : zetas)
      limits.push_back(two_sided_limit(ScoreKind::wilcoxon, z, settings).h);
  }
  std::ostringstream os;
  os << "# two-sided W chart, N(0,1) through tau " << tau << ", standardized skew-normal after\n"
     << std::fixed << "lambda";
  for (std::size_t k = 0; k < zetas.size(); ++k)
    os << std::setprecision(2) << "\tzeta=" << zetas[k] << " (h=" << std::setprecision(3) << limits[k] << ')';
  os << '\n';
  json cells = json::array();
  for (std::size_t l = 0; l < lambdas.size(); ++l)
  {
    os << std::setprecision(0) << lambdas[l];
    for (std::size_t k = 0; k < zetas.size(); ++k)
    {
      OocOptions o = options;
      o.stream = stream_id(options.stream + l * zetas.size() + k, 2);
      auto const e = asymmetry_arl(lambdas[l], zetas[k], limits[k], o, tau);
      os << std::setprecision(1) << '\t' << e.arl;
      cells.push_back({{"lambda", lambdas[l]}, {"zeta", zetas[k]}, {"h", limits[k]}, {"estimate", estimate_json(e)}});
    }
    os << '\n';
  }
  return {os.str(), {{"type", "asymmetry"}, {"tau", tau}, {"cells", cells}}};
}

ExperimentOutput run_efficiency(json const& spec, OocOptions const& options)
{
  auto const kind = parse_score_kind(spec.value("score", std::string("vdw")));
  auto const targets = spec.at("targets").get<std::vector<double>>();
  auto const rank_limits = spec.at("rank_limits").get<std::vector<double>>();
  auto const taus = spec.at("taus").get<std::vector<std::size_t>>();
  auto const deltas = spec.at("deltas").get<std::vector<double>>();
  double const arl0 = spec.value("arl0", 500.0);
  if (rank_limits.size() != targets.size())
    throw ConfigError("efficiency: need one rank-chart limit per target");
  std::vector<double> normal_limits;
  if (spec.contains("normal_limits"))
  {
    normal_limits = spec.at("normal_limits").get<std::vector<double>>();
    if (normal_limits.size() != targets.size())
      throw ConfigError("efficiency: need one normal-chart limit per target");
  }
  else
  {
    CalibrationRequest request;
    request.model = XiModel::normal();
    for (double t : targets)
      request.zetas.push_back(t / 2);
    request.arl0s = {arl0};
    request.seed = options.seed;
    auto const result = solve_control_limit(request);
    for (std::size_t k = 0; k < targets.size(); ++k)
      normal_limits.push_back(result.cell(k, 0).h);
  }

  // columns: (tau, target)
  std::vector<std::vector<EfficiencyRow>> columns;
  for (std::size_t t = 0; t < taus.size(); ++t)
  {
    for (std::size_t k = 0; k < targets.size(); ++k)
    {
      OocOptions o = options;
      o.stream = stream_id(options.stream + t * targets.size() + k, 3);
      columns.push_back(efficiency_comparison(
          kind, {targets[k] / 2, rank_limits[k]}, {targets[k] / 2, normal_limits[k]}, deltas, taus[t], o));
    }
  }
  std::ostringstream os;
  os << "# d = ceil(rank-chart ARL - normal-chart ARL), " << to_string(kind) << " chart, ARL0 " << arl0 << '\n';
  os << "delta";
  for (std::size_t t = 0; t < taus.size(); ++t)
    for (std::size_t k = 0; k < targets.size(); ++k)
      os << "\ttau=" << taus[t] << ",target=" << targets[k];
  os << '\n';
  json cells = json::array();
  for (std::size_t d = 0; d < deltas.size(); ++d)
  {
    os << deltas[d];
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
      auto const& row = columns[c][d];
      os << '\t' << row.difference;
      cells.push_back({{"delta", deltas[d]},
                       {"tau", taus[c / targets.size()]},
                       {"target", targets[c % targets.size()]},
                       {"rank_chart", estimate_json(row.ssr)},
                       {"normal_chart", estimate_json(row.normal)},
                       {"difference", row.difference}});
    }
    os << '\n';
  }
  os << "# limits: rank";
  for (double h : rank_limits)
    os << ' ' << h;
  os << ", normal";
  for (double h : normal_limits)
    os << ' ' << h;
  os << '\n';
  return {os.str(), {{"type", "efficiency"}, {"normal_limits", normal_limits}, {"cells", cells}}};
}

}  // namespace

std::vector<std::string> preset_names()
{
  return {"table2", "table2-tau100", "tableS2.2", "table3", "table4.1", "table4.2"};
}

nlohmann::json preset_manifest(std::string const& name)
{
  if (name == "table2")
    return gap_manifest(50);
  if (name == "table2-tau100")
    return gap_manifest(100);
  if (name == "tableS2.2")
    return gap_manifest(0);
  if (name == "table3")
  {
    return {{"reps", 10'000},
            {"seed", 1},
            {"experiments",
             json::array({{{"type", "asymmetry"},
                           {"lambdas", {1, 3, 5}},
                           {"zetas", {0.05, 0.15, 0.25}},
                           {"tau", 50},
                           {"arl0", 500}}})}};
  }
  if (name == "table4.1")
  {
    return {{"reps", 10'000},
            {"seed", 1},
            {"experiments",
             json::array({{{"type", "efficiency"},
                           {"score", "vdw"},
                           {"targets", {0.5, 1.0}},
                           {"rank_limits", {7.208, 4.249}},
                           {"taus", {0, 50, 100}},
                           {"deltas", {0.25, 0.4, 0.5, 0.75, 1.0, 1.25, 1.5}},
                           {"arl0", 500}}})}};
  }
  if (name == "table4.2")
  {
    return {{"reps", 10'000},
            {"seed", 1},
            {"experiments",
             json::array({{{"type", "efficiency"},
                           {"score", "vdw"},
                           {"targets", {2.0}},
                           {"rank_limits", {2.2}},
                           {"normal_limits", {2.323}},
                           {"taus", {50, 100}},
                           {"deltas", {0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}},
                           {"arl0", 500}}})}};
  }
  std::string known;
  for (auto const& n : preset_names())
    known += ' ' + n;
  throw ConfigError("unknown scenario '" + name + "' (known:" + known + ")");
}

ExperimentOutput run_manifest(nlohmann::json const& manifest)
{
  auto const start = std::chrono::steady_clock::now();
  ExperimentOutput out;
  out.results = json::array();
  if (!manifest.contains("experiments") || !manifest.at("experiments").is_array())
    throw ConfigError("manifest: missing \"experiments\" array");
  std::uint64_t index = 0;
  try
  {
    for (auto spec : manifest.at("experiments"))
    {
      for (char const* key : {"reps", "seed"})
      {
        if (!spec.contains(key) && manifest.contains(key))
          spec[key] = manifest.at(key);
      }
      OocOptions const options = options_from(spec, index++);
      auto const type = spec.at("type").get<std::string>();
      ExperimentOutput one;
      if (type == "gap_table")
        one = run_gap(spec, options);
      else if (type == "asymmetry")
        one = run_asymmetry(spec, options);
      else if (type == "efficiency")
        one = run_efficiency(spec, options);
      else
        throw ConfigError("manifest: unknown experiment type '" + type + "'");
      if (spec.contains("label"))
        out.text += "# " + spec.at("label").get<std::string>() + '\n';
      out.text += one.text + '\n';
      one.results["reps"] = options.replications;
      one.results["seed"] = options.seed;
      out.results.push_back(std::move(one.results));
    }
  }
  catch (json::exception const& e)
  {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  double const seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << "# runtime " << seconds << " s\n";
  out.text += os.str();
  return out;
}

}  // namespace ssr
