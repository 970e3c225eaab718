#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "ssr/distlab.hpp"
#include "ssr/error.hpp"
#include "ssr/phase1.hpp"

using namespace ssr;

namespace {

std::vector<double> draws(Distribution const& d, std::size_t n, std::uint64_t seed, double scale = 1)
{
  Rng rng(seed);
  auto x = d.sample(rng, n);
  for (auto& v : x)
    v *= scale;
  return x;
}

std::vector<double> transformed(std::vector<double> x, double scale, double shift)
{
  for (auto& v : x)
    v = v * scale + shift;
  return x;
}

}  // namespace

TEST_CASE("estimate_sigma")
{
  std::vector<double> const two{-1.0, 1.0};
  CHECK(estimate_sigma(two) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  auto const x = draws(Distribution::normal(), 10000, 1, 2.0);
  CHECK(estimate_sigma(x) == doctest::Approx(2.0).epsilon(0.03));
  CHECK(estimate_sigma(x, SigmaMethod::iqr) == doctest::Approx(2.0).epsilon(0.03));
  for (auto method : {SigmaMethod::sample_sd, SigmaMethod::iqr})
  {
    CHECK(estimate_sigma(transformed(x, 1, 100), method) == doctest::Approx(estimate_sigma(x, method)).epsilon(1e-10));
    CHECK(estimate_sigma(transformed(x, 7, 0), method) == doctest::Approx(7 * estimate_sigma(x, method)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(estimate_sigma(std::vector<double>(5, 3.0)), InputError);
  CHECK_THROWS_AS(estimate_sigma(std::vector<double>{1.0}), InputError);
  CHECK(parse_sigma_method("iqr") == SigmaMethod::iqr);
  CHECK(parse_sigma_method("sd") == SigmaMethod::sample_sd);
}

TEST_CASE("theta0_hat examples")
{
  auto const normal = draws(Distribution::normal(), 10000, 2);
  double const w = theta0_hat(normal, ScoreKind::wilcoxon);
  MESSAGE("normal W theta0_hat " << w);
  CHECK(w == doctest::Approx(0.98).epsilon(0.05));
  CHECK(theta0_hat(normal, ScoreKind::van_der_waerden) == doctest::Approx(1.0).epsilon(0.05));

  // sigma_hat of t3 data has a heavy-tailed sampling law; use the median over seeds.
  std::vector<double> estimates;
  for (std::uint64_t seed = 1; seed <= 9; ++seed)
    estimates.push_back(theta0_hat(draws(Distribution::student_t(3), 10000, 100 + seed), ScoreKind::wilcoxon));
  std::sort(estimates.begin(), estimates.end());
  MESSAGE("t3 W theta0_hat median " << estimates[4] << " range " << estimates.front() << ".." << estimates.back());
  CHECK(estimates[4] == doctest::Approx(1.37).epsilon(0.10));

  CHECK_THROWS_AS(theta0_hat(normal, ScoreKind::wilcoxon_squared), KindMismatch);
  CHECK_THROWS(theta0_hat(std::vector<double>(10, 1.0), ScoreKind::wilcoxon));
}

TEST_CASE("theta1_hat examples")
{
  auto const normal = draws(Distribution::normal(), 10000, 3);
  CHECK(theta1_hat(normal) == doctest::Approx(1.10).epsilon(0.10));
  auto const t4 = draws(Distribution::student_t(4), 10000, 4);
  CHECK(theta1_hat(t4) == doctest::Approx(0.94).epsilon(0.10));
  CHECK_THROWS(theta1_hat(std::vector<double>{1.0, 2.0}));
}

TEST_CASE("plug-in estimates are scale invariant")
{
  auto const x = draws(Distribution::student_t(5), 2000, 5);
  for (double c : {0.01, 10.0})
  {
    auto const y = transformed(x, c, 0);
    KdeSettings a, b;
    CHECK(theta0_hat(y, ScoreKind::wilcoxon) == doctest::Approx(theta0_hat(x, ScoreKind::wilcoxon)).epsilon(1e-10));
    CHECK(theta0_hat(y, ScoreKind::van_der_waerden)
          == doctest::Approx(theta0_hat(x, ScoreKind::van_der_waerden)).epsilon(1e-6));
    CHECK(theta1_hat(y) == doctest::Approx(theta1_hat(x)).epsilon(1e-10));
    a.bandwidth = 0.3;
    b.bandwidth = 0.3 * c;
    CHECK(theta0_hat(y, ScoreKind::wilcoxon, b) == doctest::Approx(theta0_hat(x, ScoreKind::wilcoxon, a)).epsilon(1e-10));
  }
}

TEST_CASE("theta0_hat is robust to the bandwidth on a 50-point fixture")
{
  auto const fixture = draws(Distribution::normal(), 50, 7, 0.45);
  double const b = silverman_bandwidth(fixture);
  double const base = theta0_hat(fixture, ScoreKind::wilcoxon);
  for (double factor : {0.5, 2.0})
  {
    KdeSettings settings;
    settings.bandwidth = b * factor;
    double const alt = theta0_hat(fixture, ScoreKind::wilcoxon, settings);
    MESSAGE("bandwidth x" << factor << ": " << alt << " vs " << base);
    CHECK(std::abs(alt - base) < 0.15);
  }
}

TEST_CASE("design_location")
{
  CHECK(design_location(1.18, 0.25).zeta == doctest::Approx(0.15).epsilon(0.02));
  CHECK(std::abs(design_location(1.03, 0.5).zeta - 0.25) < 0.01);
  CHECK_FALSE(design_location(1.03, 0.5).warning);
  CHECK(design_location(1.0, 7.0).warning);
  CHECK_FALSE(design_location(1.0, 7.0, ScoreKind::van_der_waerden).warning);
  CHECK_THROWS(design_location(1.0, 0.0));
}

TEST_CASE("design_dispersion")
{
  auto const d = design_dispersion(1.0, 0.5);
  CHECK(std::round(d.zeta_up * 100) / 100 == doctest::Approx(0.20));
  CHECK(std::round(d.zeta_down * 100) / 100 == doctest::Approx(0.35));
  CHECK(d.zeta_up == doctest::Approx(std::log(1.5) / 2));
  CHECK(d.zeta_down == doctest::Approx(-std::log(0.5) / 2));
  CHECK(design_dispersion(1.0, 1e-12).zeta_up < 1e-11);
  CHECK(std::round(design_dispersion(1.12, 0.5).zeta_up * 100) / 100 == doctest::Approx(0.23));
  CHECK_THROWS(design_dispersion(1.0, 0.0));
  CHECK_THROWS(design_dispersion(1.0, 1.0));
}

TEST_CASE("full Phase-I design")
{
  auto const data = draws(Distribution::normal(), 500, 8, 0.6);
  Phase1Request request;
  request.target_shift = 0.5;
  auto const design = design_from_phase1(data, request);
  CHECK(design.sigma_hat == doctest::Approx(0.6).epsilon(0.1));
  CHECK(design.sigma_hat > 0);
  CHECK(design.location.zeta == doctest::Approx(design.theta0_hat * 0.25));
  CHECK(design.dispersion.zeta_up >= 0);
  CHECK(design.dispersion.zeta_down >= 0);
  CHECK(design.bandwidth > 0);
  CHECK(design.to_text().find("zeta") != std::string::npos);
}
