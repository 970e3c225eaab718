#include "ssr/arl_lab.hpp"

#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

#include "ssr/error.hpp"
#include "ssr/simulate.hpp"

namespace ssr {
namespace {

constexpr std::size_t kMinSurvivors = 100;

void check_replications(std::size_t replications)
{
  if (replications < 1000)
  {
    throw DomainError("OOC ARL estimation needs at least 1000 replications");
  }
}

}  // namespace

//---------------------------------------------------------------------------//
void ShiftScenario::validate() const
{
  if (auto const* scale = std::get_if<ScaleChange>(&change))
  {
    if (!(scale->factor > 0))
      throw DomainError("scale change factor must be positive");
  }
  if (auto const* shift = std::get_if<LocationShift>(&change))
  {
    if (!std::isfinite(shift->delta))
      throw DomainError("location shift must be finite");
  }
}

double ShiftScenario::draw(std::size_t index, Rng& rng) const
{
  if (index <= tau)
  {
    return base.sample(rng);
  }
  return std::visit(
      [&](auto const& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LocationShift>)
          return base.sample(rng) + c.delta;
        else if constexpr (std::is_same_v<T, ScaleChange>)
          return base.sample(rng) * c.factor;
        else
          return c.after.sample(rng);
      },
      change);
}

//---------------------------------------------------------------------------//
OocArlEstimate summarize_conditional(std::span<RunLength const> runs, std::size_t tau)
{
  OocArlEstimate out;
  double sum = 0;
  double sum_sq = 0;
  for (auto const& run : runs)
  {
    if (run.capped)
    {
      ++out.capped;
      continue;
    }
    if (run.n < tau)
    {
      ++out.discarded;
      continue;
    }
    auto const delay = static_cast<double>(run.n - tau);
    sum += delay;
    sum_sq += delay * delay;
    ++out.used;
  }
  if (out.used < kMinSurvivors)
  {
    std::ostringstream os;
    os << "only " << out.used << " replications survived to the changepoint " << tau
       << " (need " << kMinSurvivors << ")";
    throw SimulationError(os.str());
  }
  double const m = static_cast<double>(out.used);
  out.arl = sum / m;
  double const var = std::max(0.0, (sum_sq - m * out.arl * out.arl) / (m - 1));
  out.standard_error = std::sqrt(var / m);
  return out;
}

OocArlEstimate ooc_arl(ShiftScenario const& scenario,
                       ScoreKind kind,
                       CusumConfig const& config,
                       OocOptions const& options)
{
  check_replications(options.replications);
  scenario.validate();
  config.validate();
  ScoreSpec const score(kind);
  auto runs = run_replications<RunLength>(
      options.replications,
      options.seed,
      options.stream,
      [&](Rng& rng, std::size_t) {
        RankAccumulator& acc = scratch_accumulator();
        return run_until_signal(config, options.cap, [&](std::size_t i) {
          SignedRank sr = acc.push(scenario.draw(i, rng));
          return score.xi(sr.index, sr.sign, sr.rank);
        });
      },
      options.workers);
  return summarize_conditional(runs, scenario.tau);
}

OocArlEstimate normal_oracle_arl(double delta_effective,
                                 CusumConfig const& config,
                                 std::size_t tau,
                                 OocOptions const& options)
{
  check_replications(options.replications);
  config.validate();
  auto runs = run_replications<RunLength>(
      options.replications,
      options.seed,
      options.stream,
      [&](Rng& rng, std::size_t) {
        std::normal_distribution<double> gauss;
        return run_until_signal(config, options.cap, [&](std::size_t i) {
          double z = gauss(rng);
          return i <= tau ? z : z + delta_effective;
        });
      },
      options.workers);
  return summarize_conditional(runs, tau);
}

//---------------------------------------------------------------------------//
GapTable heuristic_gap_table(ScoreKind kind,
                             Distribution const& dist,
                             std::vector<double> const& deltas,
                             std::vector<ReferencePair> const& pairs,
                             std::size_t tau,
                             OocOptions const& options,
                             std::optional<double> theta0_override)
{
  GapTable table;
  table.kind = kind;
  table.distribution = dist.name();
  table.theta0 = theta0_override ? *theta0_override : theta0(ScoreSpec(kind), dist).theta;
  table.tau = tau;
  table.deltas = deltas;
  table.pairs = pairs;
  for (std::size_t d = 0; d < deltas.size(); ++d)
  {
    std::vector<GapCell> row;
    for (std::size_t p = 0; p < pairs.size(); ++p)
    {
      auto const config = CusumConfig::upper(pairs[p].zeta, pairs[p].h);
      OocOptions cell_options = options;
      cell_options.stream = stream_id(options.stream + 2 * (d * pairs.size() + p), 0);
      ShiftScenario scenario{dist, LocationShift{deltas[d]}, tau};
      GapCell cell;
      cell.ssr = ooc_arl(scenario, kind, config, cell_options);
      cell_options.stream = stream_id(options.stream + 2 * (d * pairs.size() + p) + 1, 0);
      cell.normal = normal_oracle_arl(table.theta0 * deltas[d], config, tau, cell_options);
      cell.gap = std::lround(cell.ssr.arl - cell.normal.arl);
      row.push_back(cell);
    }
    table.cells.push_back(std::move(row));
  }
  return table;
}

std::string GapTable::to_text() const
{
  std::ostringstream os;
  os << "# " << to_string(kind) << " chart vs normal oracle, dist " << distribution
     << ", theta0 " << std::fixed << std::setprecision(4) << theta0 << ", tau " << tau << '\n';
  os << "delta";
  for (auto const& p : pairs)
  {
    os << std::setprecision(2) << "\tW(" << p.zeta << ',' << p.h << ")\tN\td";
  }
  os << '\n';
  for (std::size_t d = 0; d < deltas.size(); ++d)
  {
    os << std::setprecision(3) << deltas[d];
    for (auto const& c : cells[d])
    {
      os << std::setprecision(1) << '\t' << c.ssr.arl << '\t' << c.normal.arl << '\t' << c.gap;
    }
    os << '\n';
  }
  return os.str();
}

//---------------------------------------------------------------------------//
CalibrationCell two_sided_limit(ScoreKind kind, double zeta, TwoSidedLimitSettings const& settings)
{
  CalibrationRequest request;
  request.model = XiModel::ranks(kind);
  request.zetas = {zeta};
  request.arl0s = {settings.arl0};
  request.side = Sides::both;
  request.replications = settings.replications;
  request.verification_replications = settings.verification_replications;
  request.seed = settings.seed;
  auto result = solve_control_limit(request);
  return result.cells.front();
}

OocArlEstimate asymmetry_arl(double lambda,
                             double zeta,
                             std::optional<double> h,
                             OocOptions const& options,
                             std::size_t tau)
{
  double const limit = h ? *h : two_sided_limit(ScoreKind::wilcoxon, zeta, {}).h;
  ShiftScenario scenario{Distribution::normal(), DistributionSwap{Distribution::skew_normal(lambda)}, tau};
  return ooc_arl(scenario, ScoreKind::wilcoxon, CusumConfig::symmetric(zeta, limit, Sides::both), options);
}

//---------------------------------------------------------------------------//
DriftEstimate post_change_xi_mean(ShiftScenario const& scenario,
                                  ScoreKind kind,
                                  std::size_t window,
                                  OocOptions const& options)
{
  if (window == 0)
    throw DomainError("post_change_xi_mean: window must be positive");
  if (options.replications < 2)
    throw DomainError("post_change_xi_mean: need at least two replications");
  scenario.validate();
  ScoreSpec const score(kind);
  auto means = run_replications<double>(
      options.replications,
      options.seed,
      options.stream,
      [&](Rng& rng, std::size_t) {
        RankAccumulator& acc = scratch_accumulator();
        double total = 0;
        for (std::size_t i = 1; i <= scenario.tau + window; ++i)
        {
          SignedRank sr = acc.push(scenario.draw(i, rng));
          if (i > scenario.tau)
            total += score.xi(sr.index, sr.sign, sr.rank);
        }
        return total / static_cast<double>(window);
      },
      options.workers);
  double sum = 0;
  double sum_sq = 0;
  for (double m : means)
  {
    sum += m;
    sum_sq += m * m;
  }
  auto const n = static_cast<double>(means.size());
  DriftEstimate out;
  out.replications = means.size();
  out.mean = sum / n;
  out.standard_error = std::sqrt(std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1)) / n);
  return out;
}

//---------------------------------------------------------------------------//
std::vector<EfficiencyRow> efficiency_comparison(ScoreKind kind,
                                                 ReferencePair rank_chart,
                                                 ReferencePair normal_chart,
                                                 std::vector<double> const& deltas,
                                                 std::size_t tau,
                                                 OocOptions const& options)
{
  std::vector<EfficiencyRow> rows;
  for (std::size_t d = 0; d < deltas.size(); ++d)
  {
    EfficiencyRow row;
    row.delta = deltas[d];
    OocOptions cell_options = options;
    cell_options.stream = stream_id(options.stream + 2 * d, 1);
    ShiftScenario scenario{Distribution::normal(), LocationShift{deltas[d]}, tau};
    row.ssr = ooc_arl(scenario, kind, CusumConfig::upper(rank_chart.zeta, rank_chart.h), cell_options);
    cell_options.stream = stream_id(options.stream + 2 * d + 1, 1);
    row.normal = normal_oracle_arl(
        deltas[d], CusumConfig::upper(normal_chart.zeta, normal_chart.h), tau, cell_options);
    row.difference = static_cast<long>(std::ceil(row.ssr.arl - row.normal.arl));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ssr
