#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssr/random.hpp"
#include "ssr/scores.hpp"

namespace ssr {

enum class Family
{
  normal,
  student_t,
  skew_normal,
  uniform,
  empirical_kde
};

enum class Standardization
{
  unit_variance,
  unit_iqr,
  none
};

//---------------------------------------------------------------------------//
/*!
 * A univariate reference distribution under a standardized parameterization.
 *
 * The standardized variable is Y = (X - location) / divisor, where X follows
 * the raw family. Student t uses unit variance for nu >= 3 and unit IQR
 * otherwise; skew-normal is shifted and scaled to mean 0, variance 1; the
 * unstandardized uniform lives on (-1, 1).
 */
class Distribution
{
public:
  static Distribution normal();
  static Distribution student_t(double nu);
  static Distribution student_t(double nu, Standardization standardization);
  static Distribution skew_normal(double lambda);
  static Distribution uniform(Standardization standardization = Standardization::none);
  //! Gaussian kernel density estimate over \p data with bandwidth \p bandwidth.
  static Distribution kde(std::vector<double> data, double bandwidth);

  //! "normal", "t<nu>", "t<nu>:iqr|sd|raw", "skewnormal<lambda>" ("sn<lambda>"), "uniform".
  static Distribution parse(std::string_view name);

  Family family() const { return family_; }
  Standardization standardization() const { return standardization_; }
  double parameter() const { return parameter_; }
  double location() const { return location_; }
  //! Raw-to-standardized divisor.
  double scale() const { return divisor_; }
  double bandwidth() const;
  std::string name() const;

  bool symmetric() const;
  bool bounded_support() const { return family_ == Family::uniform; }

  double pdf(double y) const;
  double cdf(double y) const;
  //! 1 - cdf(y); accurate in the upper tail for KDEs.
  double survival(double y) const;
  double quantile(double p) const;
  //! quantile(1 - q) computed without cancellation.
  double quantile_upper(double q) const;

  double mean() const;
  double variance() const;

  //! Draw one standardized variate.
  double sample(Rng& rng) const;
  std::vector<double> sample(Rng& rng, std::size_t n) const;

private:
  struct Kde;

  Family family_ = Family::normal;
  Standardization standardization_ = Standardization::none;
  double parameter_ = 0;
  double location_ = 0;
  double divisor_ = 1;
  std::shared_ptr<Kde const> kde_;

  double raw_pdf(double x) const;
  double raw_cdf(double x) const;
  double raw_quantile(double p) const;
  double raw_quantile_upper(double q) const;
};

//---------------------------------------------------------------------------//
struct ThetaValue
{
  double theta = 0;
  double error_estimate = 0;
  bool diverges = false;
};

//! theta0 = E[d/dy J(2F0(y) - 1)] = 2 E[f0(Y) J'(2F0(Y) - 1)].
ThetaValue theta0(ScoreSpec const& score, Distribution const& dist, double tolerance = 1e-6);

//! theta1 = 12 E[(2F0(Y) - 1) Y f0(Y)].
ThetaValue theta1(Distribution const& dist, double tolerance = 1e-6);

//! Normal-reference bandwidth (4 / (3n))^(1/5) * sd.
double silverman_bandwidth(std::span<double const> data);

//! Gaussian KDE; a missing bandwidth selects silverman_bandwidth.
Distribution fit_kde(std::span<double const> data, std::optional<double> bandwidth = {});

}  // namespace ssr
