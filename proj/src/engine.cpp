#include "ssr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ssr/error.hpp"
#include "ssr/seqrank.hpp"

namespace ssr {

std::string_view to_string(Side side)
{
  return side == Side::upper ? "upper" : "lower";
}

std::string_view to_string(Sides sides)
{
  switch (sides)
  {
    case Sides::upper:
      return "upper";
    case Sides::lower:
      return "lower";
    case Sides::both:
      return "both";
  }
  return "?";
}

Sides parse_sides(std::string_view name)
{
  if (name == "upper")
    return Sides::upper;
  if (name == "lower")
    return Sides::lower;
  if (name == "both")
    return Sides::both;
  throw InputError("unknown side '" + std::string(name)
                   + "' (expected upper, lower or both)");
}

//---------------------------------------------------------------------------//
CusumConfig CusumConfig::symmetric(double zeta, double h, Sides sides)
{
  return CusumConfig{zeta, zeta, h, h, sides};
}

CusumConfig CusumConfig::upper(double zeta, double h)
{
  return symmetric(zeta, h, Sides::upper);
}

CusumConfig CusumConfig::lower(double zeta, double h)
{
  return symmetric(zeta, h, Sides::lower);
}

void CusumConfig::validate() const
{
  auto check_pair = [](double zeta, double h, char const* side) {
    if (!(h > 0) || !std::isfinite(h))
    {
      throw ConfigError(std::string("control limit on the ") + side
                        + " side must be positive and finite");
    }
    if (!(zeta >= 0) || !std::isfinite(zeta))
    {
      throw ConfigError(std::string("reference value on the ") + side
                        + " side must be nonnegative and finite");
    }
  };
  if (has_upper())
    check_pair(zeta_up, h_up, "upper");
  if (has_lower())
    check_pair(zeta_down, h_down, "lower");
}

//---------------------------------------------------------------------------//
std::optional<Side> step(CusumState& state, double xi, CusumConfig const& config)
{
  if (!std::isfinite(xi))
  {
    throw InputError("CUSUM step: non-finite statistic");
  }
  if (state.signaled)
  {
    throw ConfigError("CUSUM step after a signal; reset the chart first");
  }
  ++state.n;
  std::optional<Side> signal;
  if (config.has_lower())
  {
    state.d_down = std::min(0.0, state.d_down + xi + config.zeta_down);
    if (state.d_down == 0)
      state.last_zero_down = state.n;
    if (state.d_down < -config.h_down)
      signal = Side::lower;
  }
  if (config.has_upper())
  {
    state.d_up = std::max(0.0, state.d_up + xi - config.zeta_up);
    if (state.d_up == 0)
      state.last_zero_up = state.n;
    if (state.d_up > config.h_up)
      signal = Side::upper;
  }
  state.signaled = signal.has_value();
  return signal;
}

CusumChart::CusumChart(CusumConfig config) : config_(config)
{
  config_.validate();
}

//---------------------------------------------------------------------------//
RunOutcome run(std::span<double const> xs,
               ScoreSpec const& score,
               CusumConfig const& config,
               RunOptions const& options)
{
  config.validate();
  RankAccumulator ranks;
  CusumState state;
  std::vector<PathRecord> path;
  for (double x : xs)
  {
    if (state.n >= options.max_n)
    {
      return ExhaustedSummary{StopReason::run_cap, state, std::move(path)};
    }
    SignedRank sr = ranks.push(x);
    double xi = score.xi(sr.index, sr.sign, sr.rank);
    auto signal = step(state, xi, config);
    if (options.record_path)
    {
      path.push_back({state.n, state.d_up, state.d_down, signal.has_value()});
    }
    if (signal)
    {
      SignalReport report;
      report.signal_index = state.n;
      report.side = *signal;
      report.changepoint_estimate = *signal == Side::upper ? state.last_zero_up
                                                           : state.last_zero_down;
      report.d_value_at_signal = *signal == Side::upper ? state.d_up : state.d_down;
      report.path = std::move(path);
      return report;
    }
  }
  return ExhaustedSummary{StopReason::end_of_stream, state, std::move(path)};
}

}  // namespace ssr
