#include "ssr/phase1.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "ssr/distlab.hpp"
#include "ssr/error.hpp"

namespace ssr {
namespace {

constexpr double kNormalIqr = 1.3489795003921634;  // 2 * Phi^-1(0.75)

void check_sample(std::span<double const> data, std::size_t minimum)
{
  if (data.size() < minimum)
  {
    throw InputError("Phase-I data needs at least " + std::to_string(minimum) + " points");
  }
  for (double x : data)
  {
    if (!std::isfinite(x))
      throw InputError("Phase-I data contains a non-finite value");
  }
  auto const [lo, hi] = std::minmax_element(data.begin(), data.end());
  if (*lo == *hi)
    throw InputError("Phase-I data is degenerate (all values equal)");
}

// Type-7 sample quantile of sorted data.
double sorted_quantile(std::vector<double> const& sorted, double p)
{
  double const pos = p * static_cast<double>(sorted.size() - 1);
  auto const k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= sorted.size())
    return sorted.back();
  return sorted[k] + (pos - static_cast<double>(k)) * (sorted[k + 1] - sorted[k]);
}

struct Standardized
{
  std::vector<double> y;
  double sigma = 0;
  double bandwidth = 0;  // data units
  Distribution density = Distribution::normal();
};

Standardized standardize(std::span<double const> data, KdeSettings const& settings)
{
  Standardized out;
  out.sigma = estimate_sigma(data, settings.sigma);
  out.bandwidth = settings.bandwidth ? *settings.bandwidth : silverman_bandwidth(data);
  if (!(out.bandwidth > 0))
    throw DomainError("bandwidth must be positive");
  out.y.reserve(data.size());
  for (double v : data)
    out.y.push_back(v / out.sigma);
  out.density = Distribution::kde(out.y, out.bandwidth / out.sigma);
  return out;
}

}  // namespace

std::string to_string(SigmaMethod method)
{
  return method == SigmaMethod::sample_sd ? "sd" : "iqr";
}

SigmaMethod parse_sigma_method(std::string_view text)
{
  if (text == "sd" || text == "sample_sd")
    return SigmaMethod::sample_sd;
  if (text == "iqr")
    return SigmaMethod::iqr;
  throw InputError("unknown sigma method '" + std::string(text) + "' (expected sd or iqr)");
}

double estimate_sigma(std::span<double const> data, SigmaMethod method)
{
  check_sample(data, 2);
  if (method == SigmaMethod::sample_sd)
  {
    double const mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
    double ss = 0;
    for (double x : data)
      ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(data.size() - 1));
  }
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  double const iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  if (!(iqr > 0))
    throw InputError("Phase-I data has zero interquartile range");
  return iqr / kNormalIqr;
}

double theta0_hat(std::span<double const> data, ScoreKind kind, KdeSettings const& settings)
{
  if (!is_location(kind))
    throw KindMismatch("theta0_hat needs a location score");
  check_sample(data, 2);
  auto const s = standardize(data, settings);
  if (kind == ScoreKind::van_der_waerden)
    // Sampling error dwarfs 1e-4.
    return theta0(ScoreSpec(kind), s.density, 1e-4).theta;
  double sum = 0;
  for (double y : s.y)
    sum += s.density.pdf(y);
  return std::sqrt(12.0) * sum / static_cast<double>(s.y.size());
}

double theta1_hat(std::span<double const> data, KdeSettings const& settings)
{
  check_sample(data, 3);
  auto s = standardize(data, settings);
  std::sort(s.y.begin(), s.y.end());
  auto const m = static_cast<double>(s.y.size());
  double sum = 0;
  for (std::size_t i = 0; i < s.y.size(); ++i)
  {
    double const weight = 2.0 * static_cast<double>(i + 1) / (m + 1) - 1;
    sum += weight * s.y[i] * s.density.pdf(s.y[i]);
  }
  return 12.0 * sum / m;
}

LocationDesign design_location(double theta0, double delta1, ScoreKind kind)
{
  if (!(delta1 > 0))
    throw DomainError("target shift must be positive");
  LocationDesign out;
  out.zeta = theta0 * delta1 / 2;
  if (kind == ScoreKind::wilcoxon && out.zeta >= std::sqrt(3.0))
  {
    std::ostringstream os;
    os << "reference value " << out.zeta << " is at least sqrt(3), the largest Wilcoxon score;"
       << " the upper chart can never signal";
    out.warning = os.str();
  }
  return out;
}

DispersionDesign design_dispersion(double theta1, double alpha)
{
  if (!(alpha > 0 && alpha < 1))
    throw DomainError("fractional change alpha must lie in (0, 1)");
  return {theta1 * std::log1p(alpha) / 2, -theta1 * std::log(alpha) / 2};
}

Phase1Design design_from_phase1(std::span<double const> data, Phase1Request const& request)
{
  Phase1Design out;
  out.sigma_hat = estimate_sigma(data, request.kde.sigma);
  out.bandwidth = request.kde.bandwidth ? *request.kde.bandwidth : silverman_bandwidth(data);
  KdeSettings kde = request.kde;
  kde.bandwidth = out.bandwidth;
  out.theta0_hat = theta0_hat(data, request.score, kde);
  out.theta1_hat = theta1_hat(data, kde);
  out.location = design_location(out.theta0_hat, request.target_shift, request.score);
  out.dispersion = design_dispersion(out.theta1_hat, request.alpha);
  return out;
}

std::string Phase1Design::to_text() const
{
  std::ostringstream os;
  os << "sigma_hat\t" << sigma_hat << '\n'
     << "bandwidth\t" << bandwidth << '\n'
     << "theta0_hat\t" << theta0_hat << '\n'
     << "theta1_hat\t" << theta1_hat << '\n'
     << "zeta_location\t" << location.zeta << '\n'
     << "zeta_up\t" << dispersion.zeta_up << '\n'
     << "zeta_down\t" << dispersion.zeta_down << '\n';
  if (location.warning)
    os << "# warning: " << *location.warning << '\n';
  return os.str();
}

}  // namespace ssr
