#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ssr/calibrate.hpp"
#include "ssr/distlab.hpp"
#include "ssr/engine.hpp"

namespace ssr {

struct LocationShift
{
  double delta = 0;
};

struct ScaleChange
{
  double factor = 1;
};

struct DistributionSwap
{
  Distribution after;
};

using Change = std::variant<LocationShift, ScaleChange, DistributionSwap>;

/*!
 * Observations 1..tau follow \c base; observations tau+1, ... follow the
 * changed law.
 */
struct ShiftScenario
{
  Distribution base = Distribution::normal();
  Change change = LocationShift{0};
  std::size_t tau = 0;

  void validate() const;
  double draw(std::size_t index, Rng& rng) const;
};

//! Conditional OOC ARL E[N - tau | N >= tau].
struct OocArlEstimate
{
  double arl = 0;
  double standard_error = 0;
  std::size_t used = 0;
  std::size_t discarded = 0;  //!< signaled before tau
  std::size_t capped = 0;
};

struct OocOptions
{
  std::size_t replications = 10'000;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::size_t cap = 1'000'000;
  unsigned workers = 0;
};

//! Conditional run length beyond tau from raw (N, capped) results.
OocArlEstimate summarize_conditional(std::span<RunLength const> runs, std::size_t tau);

OocArlEstimate ooc_arl(ShiftScenario const& scenario,
                       ScoreKind kind,
                       CusumConfig const& config,
                       OocOptions const& options);

//! Normal CUSUM driven by N(0, 1) statistics through tau and N(delta_eff, 1) after.
OocArlEstimate normal_oracle_arl(double delta_effective,
                                 CusumConfig const& config,
                                 std::size_t tau,
                                 OocOptions const& options);

//---------------------------------------------------------------------------//
struct ReferencePair
{
  double zeta = 0;
  double h = 0;
};

struct GapCell
{
  OocArlEstimate ssr;     //!< W(delta) (or V(delta)) from the rank chart
  OocArlEstimate normal;  //!< N(theta0 delta)
  long gap = 0;           //!< round(W - N)
};

struct GapTable
{
  ScoreKind kind = ScoreKind::wilcoxon;
  std::string distribution;
  double theta0 = 0;
  std::size_t tau = 0;
  std::vector<double> deltas;
  std::vector<ReferencePair> pairs;
  std::vector<std::vector<GapCell>> cells;  //!< [delta][pair]

  std::string to_text() const;
};

/*!
 * W(delta) - N(theta0 delta) for one-sided upper charts sharing (zeta, h).
 *
 * theta0 defaults to the quadrature value for (kind, dist).
 */
GapTable heuristic_gap_table(ScoreKind kind,
                             Distribution const& dist,
                             std::vector<double> const& deltas,
                             std::vector<ReferencePair> const& pairs,
                             std::size_t tau,
                             OocOptions const& options,
                             std::optional<double> theta0_override = {});

//---------------------------------------------------------------------------//
//! Settings for the two-sided limit search behind asymmetry_arl.
struct TwoSidedLimitSettings
{
  double arl0 = 500;
  std::size_t replications = 10'000;
  std::size_t verification_replications = 20'000;
  std::uint64_t seed = 7;
};

//! h giving a two-sided signed-rank chart the in-control ARL \c settings.arl0.
CalibrationCell two_sided_limit(ScoreKind kind, double zeta, TwoSidedLimitSettings const& settings);

/*!
 * Two-sided Wilcoxon chart: standard normal through tau, standardized
 * skew-normal(lambda) afterwards. A missing \p h is calibrated to a
 * two-sided ARL0 of 500.
 */
OocArlEstimate asymmetry_arl(double lambda,
                             double zeta,
                             std::optional<double> h,
                             OocOptions const& options,
                             std::size_t tau = 50);

//---------------------------------------------------------------------------//
//! Mean of xi over tau+1 .. tau+window, averaged over replications.
struct DriftEstimate
{
  double mean = 0;
  double standard_error = 0;
  std::size_t replications = 0;
};

DriftEstimate post_change_xi_mean(ShiftScenario const& scenario,
                                  ScoreKind kind,
                                  std::size_t window,
                                  OocOptions const& options);

//---------------------------------------------------------------------------//
/*!
 * Rank chart vs. normal chart with known variance on normal data:
 * d = ceil(V(delta) - N(delta)).
 */
struct EfficiencyRow
{
  double delta = 0;
  OocArlEstimate ssr;
  OocArlEstimate normal;
  long difference = 0;
};

std::vector<EfficiencyRow> efficiency_comparison(ScoreKind kind,
                                                 ReferencePair rank_chart,
                                                 ReferencePair normal_chart,
                                                 std::vector<double> const& deltas,
                                                 std::size_t tau,
                                                 OocOptions const& options);

}  // namespace ssr
