#include "ssr/scores.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "ssr/error.hpp"

namespace ssr {
namespace {

// Acklam's rational approximation; relative error below 1.15e-9 before
// refinement.
constexpr std::array<double, 6> kA{-3.969683028665376e+01,
                                   2.209460984245205e+02,
                                   -2.759285104469687e+02,
                                   1.383577518672690e+02,
                                   -3.066479806614716e+01,
                                   2.506628277459239e+00};
constexpr std::array<double, 5> kB{-5.447609879822406e+01,
                                   1.615858368580409e+02,
                                   -1.556989798598866e+02,
                                   6.680131188771972e+01,
                                   -1.328068155288572e+01};
constexpr std::array<double, 6> kC{-7.784894002430293e-03,
                                   -3.223964580411365e-01,
                                   -2.400758277161838e+00,
                                   -2.549732539343734e+00,
                                   4.374664141464968e+00,
                                   2.938163982698783e+00};
constexpr std::array<double, 4> kD{7.784695709041462e-03,
                                   3.224671290700398e-01,
                                   2.445134137142996e+00,
                                   3.754408661907416e+00};

constexpr double kPLow = 0.02425;

double acklam_lower(double p)
{
  if (p < kPLow)
  {
    double q = std::sqrt(-2 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q
            + kC[5])
           / ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r
          + kA[5])
         * q
         / (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r
            + 1);
}

double sum_of_squared_scores(ScoreKind kind, std::size_t i)
{
  auto const denom = static_cast<double>(i + 1);
  double total = 0;
  switch (kind)
  {
    case ScoreKind::wilcoxon:
    case ScoreKind::wilcoxon_squared:
      // Dispersion statistics are normalized by the Wilcoxon nu_i.
      for (std::size_t j = 1; j <= i; ++j)
      {
        double u = static_cast<double>(j) / denom;
        total += 3 * u * u;
      }
      break;
    case ScoreKind::van_der_waerden:
      for (std::size_t j = 1; j <= i; ++j)
      {
        double z = inverse_normal_cdf(0.5 * (1 + static_cast<double>(j) / denom));
        total += z * z;
      }
      break;
  }
  return total;
}

}  // namespace

//---------------------------------------------------------------------------//
double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double normal_pdf(double z)
{
  return std::exp(-0.5 * z * z) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double inverse_normal_cdf(double p)
{
  if (!(p > 0 && p < 1))
  {
    throw DomainError("inverse_normal_cdf: p must lie in (0, 1), got "
                      + std::to_string(p));
  }
  if (p > 0.5)
  {
    // 1 - p is exact for p in [0.5, 1].
    return -inverse_normal_cdf(1 - p);
  }
  double x = acklam_lower(p);
  // Halley step; Phi(x) - p is evaluated in the lower tail where erfc keeps
  // full relative precision.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(0.5 * x * x);
  if (std::isfinite(u))
  {
    x -= u / (1 + 0.5 * x * u);
  }
  return x;
}

//---------------------------------------------------------------------------//
std::string_view to_string(ScoreKind kind)
{
  switch (kind)
  {
    case ScoreKind::wilcoxon:
      return "w";
    case ScoreKind::van_der_waerden:
      return "vdw";
    case ScoreKind::wilcoxon_squared:
      return "w2";
  }
  return "?";
}

ScoreKind parse_score_kind(std::string_view name)
{
  if (name == "w" || name == "wilcoxon")
    return ScoreKind::wilcoxon;
  if (name == "vdw" || name == "van_der_waerden")
    return ScoreKind::van_der_waerden;
  if (name == "w2" || name == "wilcoxon_squared")
    return ScoreKind::wilcoxon_squared;
  throw InputError("unknown score '" + std::string(name)
                   + "' (expected w, vdw or w2)");
}

//---------------------------------------------------------------------------//
NormalizerTable::NormalizerTable(ScoreKind kind, std::size_t n_limit)
    : kind_(kind)
    , n_limit_(n_limit)
    , chunks_(std::make_unique<std::unique_ptr<double[]>[]>(
          (n_limit + chunk_size - 1) / chunk_size))
{
}

void NormalizerTable::reserve(std::size_t n) const
{
  if (n > size())
  {
    extend_to(n);
  }
}

double NormalizerTable::extend_to(std::size_t i) const
{
  if (i == 0 || i > n_limit_)
  {
    throw DomainError("normalizer index " + std::to_string(i)
                      + " outside [1, " + std::to_string(n_limit_) + "]");
  }
  std::lock_guard<std::mutex> lock(extend_mutex_);
  std::size_t n = size_.load(std::memory_order_relaxed);
  // Fill whole chunks so a published size always covers allocated storage.
  std::size_t const target
      = std::min(n_limit_, ((i + chunk_size - 1) / chunk_size) * chunk_size);
  for (std::size_t k = n; k < target; ++k)
  {
    auto& chunk = chunks_[k / chunk_size];
    if (!chunk)
    {
      chunk = std::make_unique<double[]>(chunk_size);
    }
    std::size_t const index = k + 1;
    chunk[k % chunk_size] = std::sqrt(sum_of_squared_scores(kind_, index)
                                      / static_cast<double>(index));
  }
  if (target > n)
  {
    size_.store(target, std::memory_order_release);
  }
  return chunks_[(i - 1) / chunk_size][(i - 1) % chunk_size];
}

//---------------------------------------------------------------------------//
namespace {
NormalizerTable const& shared_table(ScoreKind kind)
{
  static NormalizerTable const wilcoxon(ScoreKind::wilcoxon,
                                        ScoreSpec::default_n_limit);
  static NormalizerTable const vdw(ScoreKind::van_der_waerden,
                                   ScoreSpec::default_n_limit);
  return kind == ScoreKind::van_der_waerden ? vdw : wilcoxon;
}
}  // namespace

ScoreSpec::ScoreSpec(ScoreKind kind) : kind_(kind), table_(&shared_table(kind))
{
}

double ScoreSpec::J(double u) const
{
  switch (kind_)
  {
    case ScoreKind::wilcoxon:
      return std::numbers::sqrt3 * u;
    case ScoreKind::van_der_waerden:
      if (u == 0)
        return 0;
      return inverse_normal_cdf(0.5 * (1 + u));
    case ScoreKind::wilcoxon_squared:
      return 3 * u * u;
  }
  return 0;
}

double ScoreSpec::J_prime(double u) const
{
  switch (kind_)
  {
    case ScoreKind::wilcoxon:
      return std::numbers::sqrt3;
    case ScoreKind::van_der_waerden:
      return 0.5 / normal_pdf(inverse_normal_cdf(0.5 * (1 + u)));
    case ScoreKind::wilcoxon_squared:
      return 6 * u;
  }
  return 0;
}

double ScoreSpec::xi_location(std::size_t i, int sign, std::size_t rank) const
{
  if (!is_location())
  {
    throw KindMismatch("xi_location requires a location score, got "
                       + std::string(to_string(kind_)));
  }
  if (rank < 1 || rank > i)
  {
    throw DomainError("rank " + std::to_string(rank) + " outside [1, "
                      + std::to_string(i) + "]");
  }
  if (sign == 0)
  {
    return 0;
  }
  double u = static_cast<double>(rank) / static_cast<double>(i + 1);
  double magnitude = J(u) / normalizer(i);
  return sign > 0 ? magnitude : -magnitude;
}

double ScoreSpec::xi(std::size_t i, int sign, std::size_t rank) const
{
  if (kind_ == ScoreKind::wilcoxon_squared)
  {
    return xi_dispersion(i, rank);
  }
  return xi_location(i, sign, rank);
}

double xi_dispersion(std::size_t i, std::size_t rank)
{
  if (rank < 1 || rank > i)
  {
    throw DomainError("rank " + std::to_string(rank) + " outside [1, "
                      + std::to_string(i) + "]");
  }
  auto const r = static_cast<double>(rank);
  auto const n = static_cast<double>(i);
  return 6 * r * r / ((2 * n + 1) * (n + 1)) - 1;
}

}  // namespace ssr
