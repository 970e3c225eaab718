#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssr/engine.hpp"
#include "ssr/simulate.hpp"

namespace ssr {

//! Monte Carlo mean run length.
struct ArlEstimate
{
  double arl = 0;
  double standard_error = 0;
  std::size_t replications = 0;
  std::size_t capped = 0;  //!< runs stopped at the cap, excluded from the mean
  std::size_t cap = 0;
};

//! Reduce run lengths to an estimate; capped runs are counted, not averaged.
ArlEstimate summarize_run_lengths(std::span<RunLength const> runs, std::size_t cap);

struct IcArlOptions
{
  std::size_t replications = 100'000;
  std::uint64_t seed = 1;
  Sides side = Sides::upper;
  std::size_t cap = 10'000'000;
  InControlDrive drive = InControlDrive::uniform_data;
  //! Offset into the replication stream space (distinct experiments sharing a seed).
  std::uint64_t stream = 0;
  unsigned workers = 0;
  //! Largest tolerated fraction of capped runs.
  double max_cap_rate = 1e-3;
};

/*!
 * In-control ARL of a one-sided (or two-sided, side = both) chart.
 *
 * Throws SimulationError when more than max_cap_rate of the runs hit the cap.
 */
ArlEstimate estimate_ic_arl(XiModel const& model, double zeta, double h, IcArlOptions const& options);

inline ArlEstimate
estimate_ic_arl(ScoreKind kind, double zeta, double h, IcArlOptions const& options)
{
  return estimate_ic_arl(XiModel::ranks(kind), zeta, h, options);
}

//! Siegmund's approximation to the in-control ARL of a one-sided normal CUSUM.
double siegmund_arl(double zeta, double h);

//---------------------------------------------------------------------------//
struct CalibrationRequest
{
  XiModel model = XiModel::ranks(ScoreKind::wilcoxon);
  std::vector<double> zetas;
  std::vector<double> arl0s;
  std::size_t replications = 10'000;
  std::size_t verification_replications = 100'000;
  //! Convergence when |A - ARL0| < max(tolerance, se_multiplier * SE).
  double tolerance = 3;
  double se_multiplier = 2;
  Sides side = Sides::upper;
  std::size_t max_iterations = 10;
  std::uint64_t seed = 20240601;
  InControlDrive drive = InControlDrive::direct_ranks;
  //! Per-replication run cap as a multiple of ARL0.
  double cap_multiple = 50;
  //! Starting limits indexed [zeta][arl0]; computed from the normal chart when absent.
  std::optional<std::vector<std::vector<double>>> initial_limits;
  //! Iterations spent on the normal-chart starting limits.
  std::size_t normal_stage_iterations = 4;
  unsigned workers = 0;

  void validate() const;
};

struct CalibrationStep
{
  double h = 0;
  ArlEstimate estimate;
};

struct CalibrationCell
{
  double zeta = 0;
  double arl0 = 0;
  double initial_h = 0;
  double h = 0;
  ArlEstimate achieved;  //!< verification pass at the final h
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<CalibrationStep> history;
};

struct CalibrationResult
{
  XiModel model;
  Sides side = Sides::upper;
  std::vector<double> zetas;
  std::vector<double> arl0s;
  std::vector<CalibrationCell> cells;  //!< row-major, zeta rows
  std::uint64_t seed = 0;
  std::size_t replications = 0;
  std::size_t verification_replications = 0;
  double runtime_seconds = 0;

  CalibrationCell const& cell(std::size_t zeta_index, std::size_t arl0_index) const
  {
    return cells[zeta_index * arl0s.size() + arl0_index];
  }

  //! h strictly decreasing in zeta and strictly increasing in ARL0.
  bool monotone() const;
  bool all_converged() const;

  //! Tab-delimited table, zeta rows by ARL0 columns.
  std::string to_text() const;
  std::string to_json() const;
};

//! Iterative Monte Carlo search for h achieving each (zeta, ARL0) target.
CalibrationResult solve_control_limit(CalibrationRequest const& request);

//! Next h from the (h, ARL) history of one cell by monotone interpolation of
//! log ARL against h; exposed for testing.
double next_control_limit(std::span<CalibrationStep const> history,
                          double arl0,
                          double zeta);

}  // namespace ssr
