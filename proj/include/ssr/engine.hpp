#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ssr/scores.hpp"

namespace ssr {

enum class Side
{
  upper,
  lower
};

enum class Sides
{
  upper,
  lower,
  both
};

std::string_view to_string(Side side);
std::string_view to_string(Sides sides);
Sides parse_sides(std::string_view name);

//---------------------------------------------------------------------------//
/*!
 * Reference values and control limits of a CUSUM.
 *
 * Lower-side quantities are stored as positive magnitudes; the recursion
 * applies the signs (D- = min(0, D- + xi + zeta_down), signal on D- < -h_down).
 */
struct CusumConfig
{
  double zeta_up = 0;
  double zeta_down = 0;
  double h_up = 1;
  double h_down = 1;
  Sides sides = Sides::upper;

  //! Symmetric chart with zeta_up = zeta_down and h_up = h_down.
  static CusumConfig symmetric(double zeta, double h, Sides sides);
  static CusumConfig upper(double zeta, double h);
  static CusumConfig lower(double zeta, double h);

  bool has_upper() const { return sides != Sides::lower; }
  bool has_lower() const { return sides != Sides::upper; }

  //! Throws ConfigError unless limits are positive and references nonnegative.
  void validate() const;
};

struct CusumState
{
  std::size_t n = 0;
  double d_up = 0;
  double d_down = 0;
  std::size_t last_zero_up = 0;
  std::size_t last_zero_down = 0;
  bool signaled = false;
};

//! One step of the recursion; returns the signaling side, upper first.
std::optional<Side> step(CusumState& state, double xi, CusumConfig const& config);

//---------------------------------------------------------------------------//
//! CUSUM statistic with its configuration.
class CusumChart
{
public:
  explicit CusumChart(CusumConfig config);

  std::optional<Side> step(double xi) { return ssr::step(state_, xi, config_); }
  void reset() { state_ = CusumState{}; }

  CusumState const& state() const { return state_; }
  CusumConfig const& config() const { return config_; }

  //! Last index at which the statistic on \p side was zero.
  std::size_t changepoint_estimate(Side side) const
  {
    return side == Side::upper ? state_.last_zero_up : state_.last_zero_down;
  }

private:
  CusumConfig config_;
  CusumState state_;
};

//---------------------------------------------------------------------------//
struct PathRecord
{
  std::size_t n = 0;
  double d_up = 0;
  double d_down = 0;
  bool signal = false;
};

struct SignalReport
{
  std::size_t signal_index = 0;
  Side side = Side::upper;
  std::size_t changepoint_estimate = 0;
  double d_value_at_signal = 0;
  std::vector<PathRecord> path;
};

enum class StopReason
{
  end_of_stream,
  run_cap
};

struct ExhaustedSummary
{
  StopReason reason = StopReason::end_of_stream;
  CusumState final_state;
  std::vector<PathRecord> path;
};

using RunOutcome = std::variant<SignalReport, ExhaustedSummary>;

struct RunOptions
{
  std::size_t max_n = 10'000'000;
  bool record_path = false;
};

//! Rank, score and run the chart over \p xs until the first signal.
RunOutcome run(std::span<double const> xs,
               ScoreSpec const& score,
               CusumConfig const& config,
               RunOptions const& options = {});

}  // namespace ssr
