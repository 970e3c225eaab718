#include "ssr/distlab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/skew_normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "ssr/error.hpp"

namespace ssr {

struct Distribution::Kde
{
  std::vector<double> points;  // sorted
  double bandwidth;
};

namespace {

// Kernel contributions beyond this many bandwidths are below 1e-16.
constexpr double kKernelCutoff = 8.6;

double parse_number(std::string_view text, std::string_view context)
{
  double value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
  {
    throw InputError("cannot parse number '" + std::string(text) + "' in '"
                     + std::string(context) + "'");
  }
  return value;
}

boost::math::skew_normal raw_skew(double lambda)
{
  return boost::math::skew_normal(0.0, 1.0, lambda);
}

double skew_delta(double lambda)
{
  return lambda / std::sqrt(1 + lambda * lambda);
}

}  // namespace

//---------------------------------------------------------------------------//
Distribution Distribution::normal()
{
  Distribution d;
  d.family_ = Family::normal;
  d.standardization_ = Standardization::unit_variance;
  return d;
}

Distribution Distribution::student_t(double nu)
{
  return student_t(nu, nu >= 3 ? Standardization::unit_variance : Standardization::unit_iqr);
}

Distribution Distribution::student_t(double nu, Standardization standardization)
{
  if (!(nu > 0))
  {
    throw DomainError("student_t: degrees of freedom must be positive");
  }
  Distribution d;
  d.family_ = Family::student_t;
  d.parameter_ = nu;
  d.standardization_ = standardization;
  boost::math::students_t raw(nu);
  switch (standardization)
  {
    case Standardization::unit_variance:
      if (!(nu > 2))
        throw DomainError("student_t: unit variance needs nu > 2");
      d.divisor_ = std::sqrt(nu / (nu - 2));
      break;
    case Standardization::unit_iqr:
      d.divisor_ = 2 * boost::math::quantile(raw, 0.75);
      break;
    case Standardization::none:
      break;
  }
  return d;
}

Distribution Distribution::skew_normal(double lambda)
{
  Distribution d;
  d.family_ = Family::skew_normal;
  d.parameter_ = lambda;
  d.standardization_ = Standardization::unit_variance;
  double const delta = skew_delta(lambda);
  d.location_ = delta * std::sqrt(2 / std::numbers::pi);
  d.divisor_ = std::sqrt(1 - 2 * delta * delta / std::numbers::pi);
  return d;
}

Distribution Distribution::uniform(Standardization standardization)
{
  Distribution d;
  d.family_ = Family::uniform;
  d.standardization_ = standardization;
  switch (standardization)
  {
    case Standardization::unit_variance:
      d.divisor_ = 1 / std::sqrt(3.0);
      break;
    case Standardization::unit_iqr:
      d.divisor_ = 1;
      break;
    case Standardization::none:
      break;
  }
  return d;
}

Distribution Distribution::kde(std::vector<double> data, double bandwidth)
{
  if (data.size() < 2)
  {
    throw InputError("kde: need at least two data points");
  }
  if (!(bandwidth > 0) || !std::isfinite(bandwidth))
  {
    throw DomainError("kde: bandwidth must be positive");
  }
  for (double x : data)
  {
    if (!std::isfinite(x))
      throw InputError("kde: non-finite data point");
  }
  std::sort(data.begin(), data.end());
  Distribution d;
  d.family_ = Family::empirical_kde;
  d.standardization_ = Standardization::none;
  d.parameter_ = bandwidth;
  d.kde_ = std::make_shared<Kde const>(Kde{std::move(data), bandwidth});
  return d;
}

Distribution Distribution::parse(std::string_view name)
{
  if (name == "normal" || name == "norm" || name == "n")
    return normal();
  if (name == "uniform" || name == "u")
    return uniform();
  if (name == "uniform:sd")
    return uniform(Standardization::unit_variance);
  if (name.starts_with("skewnormal") || name.starts_with("sn"))
  {
    auto rest = name.substr(name.starts_with("sn") ? 2 : 10);
    if (!rest.empty() && rest.front() == ':')
      rest.remove_prefix(1);
    return skew_normal(parse_number(rest, name));
  }
  if (name.starts_with("t"))
  {
    auto rest = name.substr(1);
    auto colon = rest.find(':');
    double nu = parse_number(rest.substr(0, colon), name);
    if (colon == std::string_view::npos)
      return student_t(nu);
    auto mode = rest.substr(colon + 1);
    if (mode == "sd")
      return student_t(nu, Standardization::unit_variance);
    if (mode == "iqr")
      return student_t(nu, Standardization::unit_iqr);
    if (mode == "raw")
      return student_t(nu, Standardization::none);
    throw InputError("unknown standardization '" + std::string(mode) + "'");
  }
  throw InputError("unknown distribution '" + std::string(name) + "'");
}

//---------------------------------------------------------------------------//
double Distribution::bandwidth() const
{
  return kde_ ? kde_->bandwidth : 0;
}

std::string Distribution::name() const
{
  std::ostringstream os;
  switch (family_)
  {
    case Family::normal:
      os << "normal";
      break;
    case Family::student_t:
      os << 't' << parameter_;
      if (standardization_ == Standardization::unit_iqr)
        os << ":iqr";
      else if (standardization_ == Standardization::none)
        os << ":raw";
      break;
    case Family::skew_normal:
      os << "skewnormal" << parameter_;
      break;
    case Family::uniform:
      os << "uniform";
      if (standardization_ == Standardization::unit_variance)
        os << ":sd";
      break;
    case Family::empirical_kde:
      os << "kde(n=" << kde_->points.size() << ",b=" << kde_->bandwidth << ')';
      break;
  }
  return os.str();
}

bool Distribution::symmetric() const
{
  switch (family_)
  {
    case Family::skew_normal:
      return parameter_ == 0;
    case Family::empirical_kde:
      return false;
    default:
      return true;
  }
}

//---------------------------------------------------------------------------//
double Distribution::raw_pdf(double x) const
{
  switch (family_)
  {
    case Family::normal:
      return normal_pdf(x);
    case Family::student_t:
      return boost::math::pdf(boost::math::students_t(parameter_), x);
    case Family::skew_normal:
      return boost::math::pdf(raw_skew(parameter_), x);
    case Family::uniform:
      return std::fabs(x) < 1 ? 0.5 : 0.0;
    case Family::empirical_kde: {
      auto const& pts = kde_->points;
      double const b = kde_->bandwidth;
      auto lo = std::lower_bound(pts.begin(), pts.end(), x - kKernelCutoff * b);
      auto hi = std::upper_bound(lo, pts.end(), x + kKernelCutoff * b);
      double total = 0;
      for (auto it = lo; it != hi; ++it)
      {
        double z = (x - *it) / b;
        total += std::exp(-0.5 * z * z);
      }
      return total * std::numbers::inv_sqrtpi / std::numbers::sqrt2
             / (b * static_cast<double>(pts.size()));
    }
  }
  return 0;
}

double Distribution::raw_cdf(double x) const
{
  switch (family_)
  {
    case Family::normal:
      return normal_cdf(x);
    case Family::student_t:
      return boost::math::cdf(boost::math::students_t(parameter_), x);
    case Family::skew_normal:
      return boost::math::cdf(raw_skew(parameter_), x);
    case Family::uniform:
      return std::clamp(0.5 * (x + 1), 0.0, 1.0);
    case Family::empirical_kde: {
      auto const& pts = kde_->points;
      double const b = kde_->bandwidth;
      auto lo = std::lower_bound(pts.begin(), pts.end(), x - kKernelCutoff * b);
      auto hi = std::upper_bound(lo, pts.end(), x + kKernelCutoff * b);
      double total = static_cast<double>(lo - pts.begin());
      for (auto it = lo; it != hi; ++it)
      {
        total += normal_cdf((x - *it) / b);
      }
      return total / static_cast<double>(pts.size());
    }
  }
  return 0;
}

double Distribution::survival(double y) const
{
  if (family_ != Family::empirical_kde)
    return 1 - cdf(y);
  auto const& pts = kde_->points;
  double const b = kde_->bandwidth;
  auto lo = std::lower_bound(pts.begin(), pts.end(), y - kKernelCutoff * b);
  auto hi = std::upper_bound(lo, pts.end(), y + kKernelCutoff * b);
  double total = static_cast<double>(pts.end() - hi);
  for (auto it = lo; it != hi; ++it)
  {
    total += normal_cdf((*it - y) / b);
  }
  return total / static_cast<double>(pts.size());
}

double Distribution::raw_quantile(double p) const
{
  if (!(p > 0 && p < 1))
  {
    throw DomainError("quantile: p must lie in (0, 1)");
  }
  switch (family_)
  {
    case Family::normal:
      return inverse_normal_cdf(p);
    case Family::student_t:
      return boost::math::quantile(boost::math::students_t(parameter_), p);
    case Family::skew_normal:
      return boost::math::quantile(raw_skew(parameter_), p);
    case Family::uniform:
      return 2 * p - 1;
    case Family::empirical_kde: {
      auto const& pts = kde_->points;
      double const b = kde_->bandwidth;
      double lo = pts.front() + b * inverse_normal_cdf(p);
      double hi = pts.back() + b * inverse_normal_cdf(p);
      if (lo == hi)
        return lo;
      std::uintmax_t iterations = 200;
      auto [a, c] = boost::math::tools::toms748_solve(
          [&](double x) { return raw_cdf(x) - p; },
          lo,
          hi,
          boost::math::tools::eps_tolerance<double>(50),
          iterations);
      return 0.5 * (a + c);
    }
  }
  return 0;
}

double Distribution::raw_quantile_upper(double q) const
{
  if (!(q > 0 && q < 1))
  {
    throw DomainError("quantile: q must lie in (0, 1)");
  }
  switch (family_)
  {
    case Family::normal:
      return -inverse_normal_cdf(q);
    case Family::student_t:
      return -boost::math::quantile(boost::math::students_t(parameter_), q);
    case Family::skew_normal:
      return boost::math::quantile(boost::math::complement(raw_skew(parameter_), q));
    case Family::uniform:
      return 1 - 2 * q;
    case Family::empirical_kde: {
      auto const& pts = kde_->points;
      double const b = kde_->bandwidth;
      double lo = pts.front() - b * inverse_normal_cdf(q);
      double hi = pts.back() - b * inverse_normal_cdf(q);
      if (lo == hi)
        return lo;
      auto survival = [&](double x) {
        auto first = std::lower_bound(pts.begin(), pts.end(), x - kKernelCutoff * b);
        auto last = std::upper_bound(first, pts.end(), x + kKernelCutoff * b);
        double total = static_cast<double>(pts.end() - last);
        for (auto it = first; it != last; ++it)
          total += normal_cdf((*it - x) / b);
        return total / static_cast<double>(pts.size());
      };
      std::uintmax_t iterations = 200;
      auto [a, c] = boost::math::tools::toms748_solve(
          [&](double x) { return q - survival(x); },
          lo,
          hi,
          boost::math::tools::eps_tolerance<double>(50),
          iterations);
      return 0.5 * (a + c);
    }
  }
  return 0;
}

double Distribution::pdf(double y) const
{
  return divisor_ * raw_pdf(location_ + divisor_ * y);
}

double Distribution::cdf(double y) const
{
  return raw_cdf(location_ + divisor_ * y);
}

double Distribution::quantile(double p) const
{
  return (raw_quantile(p) - location_) / divisor_;
}

double Distribution::quantile_upper(double q) const
{
  return (raw_quantile_upper(q) - location_) / divisor_;
}

double Distribution::mean() const
{
  switch (family_)
  {
    case Family::skew_normal:
      return 0;
    case Family::student_t:
      if (parameter_ <= 1)
        return std::numeric_limits<double>::quiet_NaN();
      return 0;
    case Family::empirical_kde: {
      auto const& pts = kde_->points;
      return std::accumulate(pts.begin(), pts.end(), 0.0) / static_cast<double>(pts.size());
    }
    default:
      return 0;
  }
}

double Distribution::variance() const
{
  switch (family_)
  {
    case Family::normal:
      return 1;
    case Family::student_t:
      if (parameter_ <= 2)
        return std::numeric_limits<double>::infinity();
      return parameter_ / (parameter_ - 2) / (divisor_ * divisor_);
    case Family::skew_normal:
      return 1;
    case Family::uniform:
      return 1.0 / 3.0 / (divisor_ * divisor_);
    case Family::empirical_kde: {
      auto const& pts = kde_->points;
      double m = mean();
      double ss = 0;
      for (double x : pts)
        ss += (x - m) * (x - m);
      return ss / static_cast<double>(pts.size()) + kde_->bandwidth * kde_->bandwidth;
    }
  }
  return 0;
}

//---------------------------------------------------------------------------//
double Distribution::sample(Rng& rng) const
{
  double x = 0;
  switch (family_)
  {
    case Family::normal:
      x = std::normal_distribution<double>()(rng);
      break;
    case Family::student_t:
      x = std::student_t_distribution<double>(parameter_)(rng);
      break;
    case Family::skew_normal: {
      // Z = delta |U0| + sqrt(1 - delta^2) U1
      std::normal_distribution<double> gauss;
      double const delta = skew_delta(parameter_);
      double u0 = gauss(rng);
      double u1 = gauss(rng);
      x = delta * std::fabs(u0) + std::sqrt(1 - delta * delta) * u1;
      break;
    }
    case Family::uniform:
      x = 2 * rng.uniform() - 1;
      break;
    case Family::empirical_kde: {
      auto const& pts = kde_->points;
      double base = pts[rng.uniform_index(pts.size()) - 1];
      x = base + kde_->bandwidth * std::normal_distribution<double>()(rng);
      break;
    }
  }
  return (x - location_) / divisor_;
}

std::vector<double> Distribution::sample(Rng& rng, std::size_t n) const
{
  std::vector<double> out(n);
  for (auto& x : out)
    x = sample(rng);
  return out;
}

//---------------------------------------------------------------------------//
namespace {

/*
 * Both thetas are integrated over q in (0, 1/2], pairing the lower quantile
 * F^-1(q) with the upper quantile F^-1(1 - q) so neither tail loses
 * precision.
 */
template<class F>
ThetaValue integrate_half(F&& integrand, double tolerance, char const* what)
{
  boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0;
  double l1 = 0;
  std::size_t levels = 0;
  double value = 0;
  try
  {
    value = integrator.integrate(
        [&](double q) {
          q = std::max(q, 1e-300);
          double v = integrand(q);
          return std::isfinite(v) ? v : 0.0;
        },
        0.0,
        0.5,
        1e-10,
        &error,
        &l1,
        &levels);
  }
  catch (std::exception const& e)
  {
    throw ConvergenceError(std::string(what) + ": quadrature failed: " + e.what());
  }
  if (!(error <= tolerance * std::max(1.0, std::fabs(value))))
  {
    std::ostringstream os;
    os << what << ": quadrature error estimate " << error << " exceeds tolerance "
       << tolerance << " (value " << value << ", levels " << levels << ")";
    throw ConvergenceError(os.str());
  }
  return ThetaValue{value, error, false};
}

// J'(2q - 1) for q in (0, 1/2]; J' is even for location scores.
double score_derivative_lower(ScoreKind kind, double q)
{
  if (kind == ScoreKind::van_der_waerden)
  {
    return 0.5 / normal_pdf(inverse_normal_cdf(q));
  }
  return std::numbers::sqrt3;
}

}  // namespace

ThetaValue theta0(ScoreSpec const& score, Distribution const& dist, double tolerance)
{
  if (!score.is_location())
  {
    throw KindMismatch("theta0 requires a location score");
  }
  if (score.kind() == ScoreKind::van_der_waerden && dist.bounded_support())
  {
    // f stays positive at the support edge while J' has a non-integrable
    // singularity there.
    return ThetaValue{std::numeric_limits<double>::infinity(), 0, true};
  }
  auto const kind = score.kind();
  if (dist.family() == Family::empirical_kde)
  {
    // KDE quantiles are jagged between isolated points, so integrate
    // 2 f(y)^2 J'(2F(y) - 1) over y instead.
    double const lo = dist.quantile(1e-15);
    double const hi = dist.quantile_upper(1e-15);
    double error = 0;
    double const value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double y) {
          double const q = std::min(dist.cdf(y), dist.survival(y));
          if (!(q > 0))
            return 0.0;
          double const f = dist.pdf(y);
          return 2 * f * f * score_derivative_lower(kind, q);
        },
        lo,
        hi,
        20,
        1e-3 * tolerance,
        &error);
    if (!(error <= tolerance * std::max(1.0, std::fabs(value))))
    {
      std::ostringstream os;
      os << "theta0: quadrature error estimate " << error << " exceeds tolerance " << tolerance;
      throw ConvergenceError(os.str());
    }
    return ThetaValue{value, error, false};
  }
  // theta0 = 2 int_0^1 f(F^-1(p)) J'(2p - 1) dp
  return integrate_half(
      [&](double q) {
        double lower = dist.pdf(dist.quantile(q));
        double upper = dist.pdf(dist.quantile_upper(q));
        return 2 * (lower + upper) * score_derivative_lower(kind, q);
      },
      tolerance,
      "theta0");
}

ThetaValue theta1(Distribution const& dist, double tolerance)
{
  // theta1 = 12 int_0^1 (2p - 1) F^-1(p) f(F^-1(p)) dp
  return integrate_half(
      [&](double q) {
        double yl = dist.quantile(q);
        double yu = dist.quantile_upper(q);
        return 12 * (1 - 2 * q) * (yu * dist.pdf(yu) - yl * dist.pdf(yl));
      },
      tolerance,
      "theta1");
}

//---------------------------------------------------------------------------//
double silverman_bandwidth(std::span<double const> data)
{
  if (data.size() < 2)
  {
    throw InputError("bandwidth: need at least two data points");
  }
  double const n = static_cast<double>(data.size());
  double const mean = std::accumulate(data.begin(), data.end(), 0.0) / n;
  double ss = 0;
  for (double x : data)
    ss += (x - mean) * (x - mean);
  double const sd = std::sqrt(ss / (n - 1));
  if (!(sd > 0))
  {
    throw InputError("bandwidth: degenerate data (all values equal)");
  }
  return std::pow(4.0 / (3.0 * n), 0.2) * sd;
}

Distribution fit_kde(std::span<double const> data, std::optional<double> bandwidth)
{
  if (data.size() < 2)
  {
    throw InputError("fit_kde: need at least two data points");
  }
  auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  if (*lo == *hi)
  {
    throw InputError("fit_kde: degenerate data (all values equal)");
  }
  double const b = bandwidth ? *bandwidth : silverman_bandwidth(data);
  return Distribution::kde(std::vector<double>(data.begin(), data.end()), b);
}

}  // namespace ssr
