#include <cmath>
#include <vector>

#include <doctest.h>

#include "ssr/arl_lab.hpp"
#include "ssr/error.hpp"
#include "ssr/simulate.hpp"

using namespace ssr;

namespace {

OocOptions reps(std::size_t n, std::uint64_t seed = 1)
{
  OocOptions o;
  o.replications = n;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("scenario draws switch law after tau")
{
  ShiftScenario const s{Distribution::normal(), LocationShift{100.0}, 3};
  Rng rng(1);
  for (std::size_t i = 1; i <= 3; ++i)
    CHECK(s.draw(i, rng) < 50);
  CHECK(s.draw(4, rng) > 50);
  CHECK_THROWS_AS((ShiftScenario{Distribution::normal(), ScaleChange{0.0}, 3}.validate()), DomainError);
}

TEST_CASE("ooc_arl examples")
{
  auto const normal = ooc_arl(ShiftScenario{Distribution::normal(), LocationShift{0.5}, 100},
                              ScoreKind::wilcoxon,
                              CusumConfig::upper(0.25, 7.25),
                              reps(100000));
  MESSAGE("normal delta 0.5: " << normal.arl << " +- " << normal.standard_error << ", discarded " << normal.discarded);
  CHECK(std::abs(normal.arl - 25) <= 1);
  CHECK(normal.used + normal.discarded + normal.capped == 100000);

  auto const heavy = ooc_arl(ShiftScenario{Distribution::student_t(3), LocationShift{0.25}, 100},
                             ScoreKind::wilcoxon,
                             CusumConfig::upper(0.15, 9.86),
                             reps(10000));
  MESSAGE("t3 delta 0.25: " << heavy.arl << " +- " << heavy.standard_error);
  CHECK(std::abs(heavy.arl - 38) <= 1);
}

TEST_CASE("null scenario matches the residual in-control run length")
{
  auto const config = CusumConfig::upper(0.5, 2.73);
  std::size_t const tau = 100;
  auto const null =
      ooc_arl(ShiftScenario{Distribution::normal(), LocationShift{0.0}, tau}, ScoreKind::wilcoxon, config, reps(20000));

  // Independent oracle: plain in-control runs, conditioned afterwards.
  ScoreSpec const w(ScoreKind::wilcoxon);
  auto const runs = run_replications<double>(20000, 99, 0, [&](Rng& rng, std::size_t) {
    RankAccumulator acc;
    auto const rl = run_until_signal(config, 1'000'000, [&](std::size_t) {
      auto const r = acc.push(rng.uniform() * 2 - 1);
      return w.xi(r.index, r.sign, r.rank);
    });
    return double(rl.n);
  });
  double sum = 0, sum2 = 0, used = 0;
  for (double n : runs)
  {
    if (n < double(tau))
      continue;
    sum += n - double(tau);
    sum2 += (n - double(tau)) * (n - double(tau));
    used += 1;
  }
  double const mean = sum / used;
  double const se = std::sqrt((sum2 / used - mean * mean) / used);
  MESSAGE("null " << null.arl << " +- " << null.standard_error << ", oracle " << mean << " +- " << se);
  CHECK(std::abs(null.arl - mean) < 3 * std::hypot(se, null.standard_error));
}

TEST_CASE("normal oracle examples")
{
  auto const small = normal_oracle_arl(0.98 * 0.5, CusumConfig::upper(0.25, 7.25), 100, reps(10000));
  CHECK(std::abs(small.arl - 24) <= 1);

  auto const ic = normal_oracle_arl(0.0, CusumConfig::upper(0.25, 7.267), 0, reps(20000));
  MESSAGE("normal chart IC " << ic.arl << " +- " << ic.standard_error);
  CHECK(ic.arl == doctest::Approx(500).epsilon(0.03));

  for (double d : {10.0, 25.0})
  {
    auto const big = normal_oracle_arl(d, CusumConfig::upper(0.25, 7.25), 50, reps(2000));
    CHECK(big.arl == doctest::Approx(std::ceil(7.25 / (d - 0.25))).epsilon(0.05));
  }
}

TEST_CASE("ooc estimation errors")
{
  auto const scenario = ShiftScenario{Distribution::normal(), LocationShift{1.0}, 5000};
  CHECK_THROWS_AS(ooc_arl(scenario, ScoreKind::wilcoxon, CusumConfig::upper(0.5, 1.0), reps(500)), DomainError);
  CHECK_THROWS_AS(ooc_arl(scenario, ScoreKind::wilcoxon, CusumConfig::upper(0.5, 1.0), reps(1000)), SimulationError);
}

TEST_CASE("heuristic gap table at tau 50 for small shifts on normal data")
{
  auto const table = heuristic_gap_table(
      ScoreKind::wilcoxon, Distribution::normal(), {0.125, 0.25}, {{0.10, 12.01}}, 50, reps(10000));
  MESSAGE(table.to_text());
  CHECK(table.theta0 == doctest::Approx(0.9772).epsilon(1e-4));
  CHECK(std::abs(table.cells[0][0].gap) <= 2);
  CHECK(std::abs(table.cells[1][0].gap) <= 2);
}

TEST_CASE("heuristic underestimates at tau 0")
{
  auto const table =
      heuristic_gap_table(ScoreKind::wilcoxon, Distribution::student_t(3), {1.5}, {{0.35, 5.66}}, 0, reps(10000));
  auto const& cell = table.cells[0][0];
  MESSAGE("W " << cell.ssr.arl << " N " << cell.normal.arl);
  CHECK(std::abs(cell.ssr.arl - 11) <= 1);
  CHECK(std::abs(cell.normal.arl - 4) <= 1);
  CHECK(std::abs(cell.gap - 7) <= 1);
}

TEST_CASE("skew-normal with lambda 0 is in control")
{
  double const h = 11.93;
  auto const skew = asymmetry_arl(0.0, 0.15, h, reps(10000, 3));
  auto const null = ooc_arl(ShiftScenario{Distribution::normal(), LocationShift{0.0}, 50},
                            ScoreKind::wilcoxon,
                            CusumConfig::symmetric(0.15, h, Sides::both),
                            reps(10000, 4));
  MESSAGE("lambda 0: " << skew.arl << ", normal " << null.arl);
  CHECK(std::abs(skew.arl - null.arl) < 3 * std::hypot(skew.standard_error, null.standard_error));
}

TEST_CASE("post-change drift of the location statistic")
{
  ShiftScenario const s{Distribution::normal(), LocationShift{0.25}, 200};
  auto const drift = post_change_xi_mean(s, ScoreKind::wilcoxon, 1, reps(10000));
  double const target = 0.9772 * 0.25;
  CHECK(std::abs(drift.mean - target) < 3 * drift.standard_error);
}

TEST_CASE("Van der Waerden chart tracks the known-variance normal chart")
{
  CalibrationRequest request;
  request.model = XiModel::normal();
  request.zetas = {0.25};
  request.arl0s = {500};
  request.verification_replications = 20'000;
  double const normal_h = solve_control_limit(request).cell(0, 0).h;
  auto const rows = efficiency_comparison(
      ScoreKind::van_der_waerden, {0.25, 7.208}, {0.25, normal_h}, {0.5, 0.75, 1.0, 1.5}, 50, reps(10000));
  for (auto const& row : rows)
  {
    MESSAGE("delta " << row.delta << ": V " << row.ssr.arl << " N " << row.normal.arl << " d " << row.difference);
    CHECK(row.difference <= 4);
  }
}
