#include <cmath>
#include <limits>
#include <vector>

#include <doctest.h>

#include "ssr/arl_lab.hpp"
#include "ssr/distlab.hpp"
#include "ssr/engine.hpp"
#include "ssr/error.hpp"
#include "ssr/simulate.hpp"

using namespace ssr;

namespace {

struct MeanSe
{
  double mean;
  double se;
};

MeanSe mean_se(std::vector<double> const& v)
{
  double m = 0;
  for (double x : v)
    m += x;
  m /= double(v.size());
  double ss = 0;
  for (double x : v)
    ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / double(v.size() - 1) / double(v.size()))};
}

// In-control run lengths of the Wilcoxon chart on data drawn from dist.
MeanSe ic_run_lengths(Distribution const& dist, CusumConfig const& config, std::size_t reps, std::uint64_t seed)
{
  ScoreSpec const w(ScoreKind::wilcoxon);
  auto const runs = run_replications<double>(reps, seed, 0, [&](Rng& rng, std::size_t) {
    RankAccumulator acc;
    auto const rl = run_until_signal(config, 1'000'000, [&](std::size_t) {
      auto const r = acc.push(dist.sample(rng));
      return w.xi(r.index, r.sign, r.rank);
    });
    return double(rl.n);
  });
  return mean_se(runs);
}

}  // namespace

TEST_CASE("step examples")
{
  auto const config = CusumConfig::upper(0.25, 7.25);
  CusumState state;
  CHECK_FALSE(step(state, 0.5, config));
  CHECK(state.d_up == doctest::Approx(0.25));
  CHECK_FALSE(step(state, -1.0, config));
  CHECK(state.d_up == 0);
  CHECK(state.last_zero_up == 2);
  CHECK(state.n == 2);
}

TEST_CASE("constant sqrt(3) stream signals at the minimum time")
{
  double const zeta = 0.25, h = 7.25;
  auto const config = CusumConfig::upper(zeta, h);
  CusumState state;
  std::size_t n = 0;
  while (!step(state, std::sqrt(3.0), config))
    ++n;
  ++n;
  CHECK(n == std::size_t(std::floor(h / (std::sqrt(3.0) - zeta))) + 1);
  CHECK(n == 5);
}

TEST_CASE("lower side and simultaneous crossings")
{
  auto const lower = CusumConfig::lower(0.5, 1.0);
  CusumState s;
  CHECK_FALSE(step(s, -1.0, lower));
  CHECK(s.d_down == doctest::Approx(-0.5));
  CHECK(s.d_up == 0);
  auto side = step(s, -1.5, lower);
  REQUIRE(side);
  CHECK(*side == Side::lower);
  CHECK(s.last_zero_down == 0);

  // Both statistics start beyond their limits.
  CusumConfig both = CusumConfig::symmetric(0, 1, Sides::both);
  CusumState t;
  t.d_up = 2;
  t.d_down = -2;
  auto first = step(t, 0.0, both);
  REQUIRE(first);
  CHECK(*first == Side::upper);
}

TEST_CASE("step errors")
{
  auto const config = CusumConfig::upper(0.25, 1.0);
  CusumState s;
  CHECK_THROWS_AS(step(s, std::numeric_limits<double>::quiet_NaN(), config), InputError);
  CHECK(step(s, 2.0, config));
  CHECK_THROWS_AS(step(s, 0.0, config), ConfigError);
  CHECK_THROWS_AS(CusumConfig::upper(0.25, 0).validate(), ConfigError);
  CHECK_THROWS_AS(CusumConfig::upper(-0.1, 1).validate(), ConfigError);
}

TEST_CASE("reset_chart")
{
  CusumChart chart(CusumConfig::symmetric(0.25, 2.0, Sides::both));
  chart.step(1.5);
  chart.step(1.5);
  chart.reset();
  CHECK(chart.state().d_up == 0);
  CHECK(chart.state().n == 0);
  CHECK_FALSE(chart.step(0.5));
  CHECK(chart.state().d_up == doctest::Approx(0.25));
  CHECK(chart.state().n == 1);
}

TEST_CASE("run on an all-zero stream never signals")
{
  std::vector<double> const zeros(10000, 0.0);
  auto const outcome =
      run(zeros, ScoreSpec(ScoreKind::wilcoxon), CusumConfig::symmetric(0.25, 7.25, Sides::both));
  REQUIRE(std::holds_alternative<ExhaustedSummary>(outcome));
  auto const& summary = std::get<ExhaustedSummary>(outcome);
  CHECK(summary.reason == StopReason::end_of_stream);
  CHECK(summary.final_state.n == 10000);
  CHECK(summary.final_state.d_up == 0);
}

TEST_CASE("run reports a run cap distinctly")
{
  std::vector<double> const zeros(100, 0.0);
  auto const outcome =
      run(zeros, ScoreSpec(ScoreKind::wilcoxon), CusumConfig::upper(0.25, 7.25), RunOptions{10, false});
  REQUIRE(std::holds_alternative<ExhaustedSummary>(outcome));
  CHECK(std::get<ExhaustedSummary>(outcome).reason == StopReason::run_cap);
}

TEST_CASE("paths keep their sign, stay deterministic and place the changepoint before the signal")
{
  auto const config = CusumConfig::symmetric(0.25, 7.25, Sides::both);
  ScoreSpec const w(ScoreKind::wilcoxon);
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
  {
    Rng rng(seed);
    auto xs = Distribution::student_t(3).sample(rng, 3000);
    for (std::size_t i = 300; i < xs.size(); ++i)
      xs[i] += seed % 2 ? 0.6 : -0.6;
    auto const a = run(xs, w, config, RunOptions{10'000'000, true});
    auto const b = run(xs, w, config, RunOptions{10'000'000, true});
    REQUIRE(std::holds_alternative<SignalReport>(a));
    auto const& ra = std::get<SignalReport>(a);
    auto const& rb = std::get<SignalReport>(b);
    CHECK(ra.signal_index == rb.signal_index);
    CHECK(ra.changepoint_estimate < ra.signal_index);
    REQUIRE(ra.path.size() == rb.path.size());
    for (std::size_t k = 0; k < ra.path.size(); ++k)
    {
      REQUIRE(ra.path[k].d_up >= 0);
      REQUIRE(ra.path[k].d_down <= 0);
      REQUIRE(ra.path[k].d_up == rb.path[k].d_up);
      REQUIRE(ra.path[k].d_down == rb.path[k].d_down);
    }
    CHECK(ra.path.back().signal);
  }
}

TEST_CASE("two-sided in-control ARL is about half the one-sided 500")
{
  auto const est = ic_run_lengths(Distribution::normal(), CusumConfig::symmetric(0.25, 7.25, Sides::both), 10000, 21);
  MESSAGE("two-sided IC ARL " << est.mean << " +- " << est.se);
  CHECK(est.mean == doctest::Approx(250).epsilon(0.06));
}

TEST_CASE("location charts are distribution free in control")
{
  auto const config = CusumConfig::upper(0.25, 7.25);
  auto const u = ic_run_lengths(Distribution::uniform(), config, 10000, 31);
  for (auto const& dist : {Distribution::normal(), Distribution::student_t(3)})
  {
    auto const other = ic_run_lengths(dist, config, 10000, 32);
    double const z = (other.mean - u.mean) / std::hypot(other.se, u.se);
    MESSAGE(dist.name() << ": " << other.mean << " vs uniform " << u.mean << ", z=" << z);
    CHECK(std::abs(z) < 3);
  }
}

TEST_CASE("shift of one at tau 50 is close to the normal oracle")
{
  double const theta = theta0(ScoreSpec(ScoreKind::wilcoxon), Distribution::normal()).theta;
  auto const config = CusumConfig::upper(0.25, 7.25);
  OocOptions options;
  options.replications = 10000;
  auto const rank =
      ooc_arl(ShiftScenario{Distribution::normal(), LocationShift{1.0}, 50}, ScoreKind::wilcoxon, config, options);
  auto const oracle = normal_oracle_arl(theta * 1.0, config, 50, options);
  MESSAGE("W " << rank.arl << " N " << oracle.arl);
  CHECK(std::abs(rank.arl - oracle.arl) <= 2);
}
