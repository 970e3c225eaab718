#include <cmath>
#include <numbers>

#include <boost/math/distributions/normal.hpp>
#include <doctest.h>

#include "ssr/error.hpp"
#include "ssr/scores.hpp"

using namespace ssr;

namespace {

double oracle_quantile(double p)
{
  return boost::math::quantile(boost::math::normal_distribution<double>{}, p);
}

}  // namespace

TEST_CASE("inverse normal cdf matches the Boost quantile")
{
  CHECK(std::abs(inverse_normal_cdf(0.5)) < 1e-15);
  CHECK(inverse_normal_cdf(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(inverse_normal_cdf(0.75) == doctest::Approx(0.674490).epsilon(1e-6));

  for (double lg = -10; lg < -0.3; lg += 0.37)
  {
    double const p = std::pow(10.0, lg);
    for (double q : {p, 1 - p})
    {
      double const z = inverse_normal_cdf(q);
      CHECK(std::abs(normal_cdf(z) - q) < 1e-12);
      CHECK(z == doctest::Approx(oracle_quantile(q)).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(inverse_normal_cdf(0.0), DomainError);
  CHECK_THROWS_AS(inverse_normal_cdf(1.0), DomainError);
  CHECK_THROWS_AS(inverse_normal_cdf(-0.5), DomainError);
}

TEST_CASE("score functions are odd and normalized")
{
  for (auto kind : {ScoreKind::wilcoxon, ScoreKind::van_der_waerden})
  {
    ScoreSpec const s(kind);
    for (double u = -0.99; u < 1; u += 0.0725)
      CHECK(s.J(-u) == doctest::Approx(-s.J(u)).epsilon(1e-14));

    // Midpoint sum of J^2 on (0, 1), refined near 1 for the VdW singularity.
    double integral = 0;
    double lo = 0;
    for (double hi : {0.9, 0.999, 0.99999, 0.9999999, 0.999999999, 1.0})
    {
      int const steps = 200000;
      double const w = (hi - lo) / steps;
      for (int k = 0; k < steps; ++k)
      {
        double const j = s.J(lo + (k + 0.5) * w);
        integral += j * j * w;
      }
      lo = hi;
    }
    CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
  }
  ScoreSpec const w(ScoreKind::wilcoxon);
  CHECK(w.J(0.4) == std::sqrt(3.0) * 0.4);
  ScoreSpec const v(ScoreKind::van_der_waerden);
  CHECK(v.J(0.5) == doctest::Approx(oracle_quantile(0.75)).epsilon(1e-13));
}

TEST_CASE("normalizers follow the defining sum")
{
  ScoreSpec const w(ScoreKind::wilcoxon);
  for (std::size_t i : {1u, 2u, 3u, 10u, 999u, 1024u, 1025u, 5000u})
  {
    double const nu = w.normalizer(i);
    CHECK(nu * nu == doctest::Approx(wilcoxon_normalizer_squared(i)).epsilon(1e-12));
  }
  ScoreSpec const v(ScoreKind::van_der_waerden);
  for (std::size_t i : {1u, 7u, 40u})
  {
    double sum = 0;
    for (std::size_t j = 1; j <= i; ++j)
    {
      double const z = oracle_quantile((1 + double(j) / double(i + 1)) / 2);
      sum += z * z;
    }
    CHECK(v.normalizer(i) == doctest::Approx(std::sqrt(sum / double(i))).epsilon(1e-12));
    CHECK(v.normalizer(i) > 0);
  }
}

TEST_CASE("xi_location examples")
{
  ScoreSpec const w(ScoreKind::wilcoxon);
  ScoreSpec const v(ScoreKind::van_der_waerden);
  CHECK(w.xi_location(1, +1, 1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.xi_location(2, -1, 2) == doctest::Approx(-2 * std::sqrt(6.0 / 15)).epsilon(1e-14));
  CHECK(w.xi_location(2, -1, 2) == doctest::Approx(-1.26491).epsilon(1e-5));
  CHECK(v.xi_location(1, +1, 1) == doctest::Approx(1.0).epsilon(1e-14));

  for (std::size_t i = 1; i <= 30; ++i)
    for (std::size_t r = 1; r <= i; ++r)
      CHECK(w.xi_location(i, 1, r)
            == doctest::Approx(std::sqrt(6.0 / ((2.0 * i + 1) * (i + 1))) * double(r)).epsilon(1e-13));

  CHECK_THROWS_AS(w.xi_location(3, 1, 0), DomainError);
  CHECK_THROWS_AS(w.xi_location(3, 1, 4), DomainError);
  CHECK_THROWS_AS(ScoreSpec(ScoreKind::wilcoxon_squared).xi_location(3, 1, 1), KindMismatch);
}

TEST_CASE("xi_dispersion examples and range")
{
  CHECK(xi_dispersion(1, 1) == doctest::Approx(0.0).scale(1));
  CHECK(xi_dispersion(2, 2) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(xi_dispersion(2, 1) == doctest::Approx(-0.6).epsilon(1e-14));
  CHECK_THROWS_AS(xi_dispersion(2, 3), DomainError);
  CHECK_THROWS_AS(xi_dispersion(2, 0), DomainError);
  for (std::size_t i = 1; i <= 200; ++i)
  {
    for (std::size_t r = 1; r <= i; ++r)
    {
      double const x = xi_dispersion(i, r);
      CHECK(x > -1);
      CHECK(x <= 2);
    }
  }
}

TEST_CASE("exact in-control moments by enumeration")
{
  for (auto kind : {ScoreKind::wilcoxon, ScoreKind::van_der_waerden})
  {
    ScoreSpec const s(kind);
    for (std::size_t i = 1; i <= 50; ++i)
    {
      double m1 = 0, m2 = 0;
      for (int sign : {-1, 1})
      {
        for (std::size_t r = 1; r <= i; ++r)
        {
          double const x = s.xi_location(i, sign, r);
          m1 += x;
          m2 += x * x;
          CHECK(s.xi_location(i, sign, r) == -s.xi_location(i, -sign, r));
        }
      }
      CHECK(std::abs(m1 / double(2 * i)) < 1e-10);
      CHECK(std::abs(m2 / double(2 * i) - 1) < 1e-10);
    }
  }
  for (std::size_t i = 1; i <= 50; ++i)
  {
    double m = 0;
    for (std::size_t r = 1; r <= i; ++r)
      m += xi_dispersion(i, r);
    CHECK(std::abs(m / double(i)) < 1e-10);
  }
}

TEST_CASE("Wilcoxon statistic is bounded by sqrt(3)")
{
  ScoreSpec const w(ScoreKind::wilcoxon);
  double worst = 0;
  for (std::size_t i = 1; i <= 10000; ++i)
    worst = std::max(worst, w.xi_location(i, 1, i));
  CHECK(worst <= std::sqrt(3.0));
  CHECK(worst > 1.73);
}

TEST_CASE("score names parse")
{
  CHECK(parse_score_kind("w") == ScoreKind::wilcoxon);
  CHECK(parse_score_kind("vdw") == ScoreKind::van_der_waerden);
  CHECK(parse_score_kind("w2") == ScoreKind::wilcoxon_squared);
  CHECK(parse_score_kind(to_string(ScoreKind::van_der_waerden)) == ScoreKind::van_der_waerden);
  CHECK_THROWS(parse_score_kind("median"));
}
