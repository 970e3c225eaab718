#include "ssr/simulate.hpp"

#include <random>

namespace ssr {

std::string_view to_string(InControlDrive drive)
{
  return drive == InControlDrive::uniform_data ? "uniform_data" : "direct_ranks";
}

RankAccumulator& scratch_accumulator()
{
  thread_local RankAccumulator acc;
  acc.reset();
  return acc;
}

RunLength simulate_in_control(XiModel const& model,
                              CusumConfig const& config,
                              std::size_t cap,
                              InControlDrive drive,
                              Rng& rng)
{
  if (model.kind == XiModel::Kind::gaussian)
  {
    std::normal_distribution<double> gauss;
    return run_until_signal(config, cap, [&](std::size_t) { return gauss(rng); });
  }

  ScoreSpec const score(model.score);
  if (drive == InControlDrive::direct_ranks)
  {
    return run_until_signal(config, cap, [&](std::size_t i) {
      // Uniform on the 2i signed ranks {-i..-1, 1..i}.
      auto v = static_cast<std::size_t>(rng.uniform_index(2 * i));
      int sign = v > i ? 1 : -1;
      std::size_t rank = v > i ? v - i : v;
      return score.xi(i, sign, rank);
    });
  }

  RankAccumulator& acc = scratch_accumulator();
  return run_until_signal(config, cap, [&](std::size_t) {
    double x = 2 * rng.uniform() - 1;
    SignedRank sr = acc.push(x);
    return score.xi(sr.index, sr.sign, sr.rank);
  });
}

}  // namespace ssr
