#pragma once

#include <optional>
#include <span>
#include <string>

#include "ssr/scores.hpp"

namespace ssr {

enum class SigmaMethod
{
  sample_sd,
  iqr  //!< interquartile range / (2 * 0.6745), consistent for the normal
};

std::string to_string(SigmaMethod method);
SigmaMethod parse_sigma_method(std::string_view text);

//! Location-invariant, scale-equivariant spread estimate of Phase-I data.
double estimate_sigma(std::span<double const> data, SigmaMethod method = SigmaMethod::sample_sd);

//! Named theta presets for designs without Phase-I data.
namespace presets {
inline constexpr double theta0_near_normal = 1.0;
inline constexpr double theta0_heavy_tails = 1.3;
inline constexpr double theta1_default = 1.0;
}  // namespace presets

struct KdeSettings
{
  SigmaMethod sigma = SigmaMethod::sample_sd;
  //! In data units; Silverman's rule on the raw data when absent.
  std::optional<double> bandwidth;
};

/*!
 * Plug-in theta0 from Phase-I differences.
 *
 * Wilcoxon: sqrt(12) times the mean of the standardized KDE at the
 * standardized data points. Van der Waerden: quadrature against the KDE.
 */
double theta0_hat(std::span<double const> data, ScoreKind kind, KdeSettings const& settings = {});

//! 12/m * sum (2i/(m+1) - 1) Y_(i) f(Y_(i)) over standardized order statistics.
double theta1_hat(std::span<double const> data, KdeSettings const& settings = {});

struct LocationDesign
{
  double zeta = 0;
  //! Set when the Wilcoxon upper chart could never signal.
  std::optional<std::string> warning;
};

//! zeta = theta0 * delta1 / 2.
LocationDesign design_location(double theta0, double delta1, ScoreKind kind = ScoreKind::wilcoxon);

struct DispersionDesign
{
  double zeta_up = 0;    //!< theta1 log(1 + alpha) / 2
  double zeta_down = 0;  //!< -theta1 log(alpha) / 2, as a magnitude
};

DispersionDesign design_dispersion(double theta1, double alpha);

struct Phase1Design
{
  double sigma_hat = 0;
  double bandwidth = 0;  //!< data units
  double theta0_hat = 0;
  double theta1_hat = 0;
  LocationDesign location;
  DispersionDesign dispersion;

  std::string to_text() const;
};

struct Phase1Request
{
  ScoreKind score = ScoreKind::wilcoxon;
  KdeSettings kde;
  double target_shift = 0.5;  //!< delta1, in units of sigma
  double alpha = 0.5;
};

Phase1Design design_from_phase1(std::span<double const> data, Phase1Request const& request);

}  // namespace ssr
