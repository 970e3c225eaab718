#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "ssr/engine.hpp"
#include "ssr/random.hpp"
#include "ssr/scores.hpp"
#include "ssr/seqrank.hpp"

namespace ssr {

/*!
 * How in-control statistics are produced.
 *
 * uniform_data pushes uniform(-1, 1) observations through a RankAccumulator.
 * direct_ranks draws (sign, rank) uniformly on {+-1} x {1..i}, which is the
 * exact in-control law of signed sequential ranks for any continuous
 * symmetric input, without materializing data.
 */
enum class InControlDrive
{
  uniform_data,
  direct_ranks
};

std::string_view to_string(InControlDrive drive);

//! Statistic feeding a simulated chart: signed-rank scores or i.i.d. N(0, 1).
struct XiModel
{
  enum class Kind
  {
    signed_rank,
    gaussian
  };
  Kind kind = Kind::signed_rank;
  ScoreKind score = ScoreKind::wilcoxon;

  static XiModel ranks(ScoreKind score) { return {Kind::signed_rank, score}; }
  static XiModel normal() { return {Kind::gaussian, ScoreKind::wilcoxon}; }
};

struct RunLength
{
  std::size_t n = 0;
  bool capped = false;
  Side side = Side::upper;
  std::size_t changepoint_estimate = 0;
};

/*!
 * Run the chart on a stream until signal or cap.
 *
 * \p next_xi is called with the 1-based index and must return xi_i.
 */
template<class NextXi>
RunLength run_until_signal(CusumConfig const& config, std::size_t cap, NextXi&& next_xi)
{
  CusumState state;
  while (state.n < cap)
  {
    double xi = next_xi(state.n + 1);
    if (auto side = step(state, xi, config))
    {
      std::size_t cp = *side == Side::upper ? state.last_zero_up : state.last_zero_down;
      return RunLength{state.n, false, *side, cp};
    }
  }
  return RunLength{state.n, true, Side::upper, 0};
}

//! One in-control run length.
RunLength simulate_in_control(XiModel const& model,
                              CusumConfig const& config,
                              std::size_t cap,
                              InControlDrive drive,
                              Rng& rng);

//! Per-thread scratch accumulator, reset before return.
RankAccumulator& scratch_accumulator();

}  // namespace ssr
