#include "ssr/calibrate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

// pchip.hpp calls isnan unqualified.
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>
#include <json.hpp>

#include "ssr/error.hpp"

namespace ssr {
namespace {

constexpr std::uint64_t kStageNormal = 1;
constexpr std::uint64_t kStageSearch = 2;
constexpr std::uint64_t kStageVerify = 3;

CusumConfig chart_for(double zeta, double h, Sides side)
{
  return CusumConfig::symmetric(zeta, h, side);
}

// One-sided target equivalent to a two-sided ARL0 (1/A = 1/A+ + 1/A-).
double one_sided_target(double arl0, Sides side)
{
  return side == Sides::both ? 2 * arl0 : arl0;
}

double siegmund_log_slope(double zeta, double h)
{
  double const step = 1e-4 * std::max(1.0, h);
  return (std::log(siegmund_arl(zeta, h + step)) - std::log(siegmund_arl(zeta, h - step)))
         / (2 * step);
}

double siegmund_limit(double zeta, double target)
{
  double lo = 1e-3;
  double hi = 1e3;
  for (int k = 0; k < 200; ++k)
  {
    double mid = 0.5 * (lo + hi);
    (siegmund_arl(zeta, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

bool within_tolerance(ArlEstimate const& est, double arl0, double tolerance, double se_multiplier)
{
  return std::fabs(est.arl - arl0) < std::max(tolerance, se_multiplier * est.standard_error);
}

}  // namespace

//---------------------------------------------------------------------------//
ArlEstimate summarize_run_lengths(std::span<RunLength const> runs, std::size_t cap)
{
  ArlEstimate out;
  out.cap = cap;
  out.replications = runs.size();
  double sum = 0;
  double sum_sq = 0;
  std::size_t used = 0;
  for (auto const& run : runs)
  {
    if (run.capped)
    {
      ++out.capped;
      continue;
    }
    auto const n = static_cast<double>(run.n);
    sum += n;
    sum_sq += n * n;
    ++used;
  }
  if (used == 0)
  {
    throw SimulationError("every replication reached the run cap");
  }
  double const m = static_cast<double>(used);
  out.arl = sum / m;
  double const var = used > 1 ? std::max(0.0, (sum_sq - m * out.arl * out.arl) / (m - 1)) : 0;
  out.standard_error = std::sqrt(var / m);
  return out;
}

ArlEstimate estimate_ic_arl(XiModel const& model, double zeta, double h, IcArlOptions const& options)
{
  if (!(h > 0))
    throw DomainError("estimate_ic_arl: h must be positive");
  if (!(zeta >= 0))
    throw DomainError("estimate_ic_arl: zeta must be nonnegative");
  if (options.replications < 100)
    throw DomainError("estimate_ic_arl: need at least 100 replications");
  CusumConfig const config = chart_for(zeta, h, options.side);
  config.validate();
  if (model.kind == XiModel::Kind::signed_rank && model.score == ScoreKind::van_der_waerden)
  {
    // Warm the shared normalizer table outside the parallel section.
    ScoreSpec(model.score).normalizers().reserve(std::min<std::size_t>(options.cap, 1 << 14));
  }
  auto runs = run_replications<RunLength>(
      options.replications,
      options.seed,
      options.stream,
      [&](Rng& rng, std::size_t) {
        return simulate_in_control(model, config, options.cap, options.drive, rng);
      },
      options.workers);
  ArlEstimate est = summarize_run_lengths(runs, options.cap);
  double const cap_rate = static_cast<double>(est.capped) / static_cast<double>(est.replications);
  if (cap_rate > options.max_cap_rate)
  {
    std::ostringstream os;
    os << "estimate_ic_arl: " << est.capped << " of " << est.replications
       << " runs reached the cap " << options.cap << " (zeta " << zeta << ", h " << h << ")";
    throw SimulationError(os.str());
  }
  return est;
}

double siegmund_arl(double zeta, double h)
{
  double const b = h + 1.166;
  if (zeta < 1e-8)
  {
    return b * b;
  }
  double const a = 2 * zeta * b;
  return (std::exp(a) - a - 1) / (2 * zeta * zeta);
}

//---------------------------------------------------------------------------//
void CalibrationRequest::validate() const
{
  if (zetas.empty() || arl0s.empty())
    throw ConfigError("calibration: zeta and ARL0 grids must be non-empty");
  if (!std::is_sorted(zetas.begin(), zetas.end()) || !std::is_sorted(arl0s.begin(), arl0s.end()))
    throw ConfigError("calibration: grids must be sorted");
  for (double z : zetas)
    if (!(z > 0))
      throw ConfigError("calibration: reference values must be positive");
  for (double a : arl0s)
    if (!(a > 1))
      throw ConfigError("calibration: ARL0 targets must exceed 1");
  if (!(tolerance > 0))
    throw ConfigError("calibration: tolerance must be positive");
  if (replications < 100 || verification_replications < 100)
    throw ConfigError("calibration: need at least 100 replications");
  if (max_iterations == 0)
    throw ConfigError("calibration: max_iterations must be positive");
  if (!(cap_multiple > 1))
    throw ConfigError("calibration: cap_multiple must exceed 1");
  if (initial_limits)
  {
    if (initial_limits->size() != zetas.size())
      throw ConfigError("calibration: initial limits must have one row per zeta");
    for (auto const& row : *initial_limits)
      if (row.size() != arl0s.size())
        throw ConfigError("calibration: initial limits must have one column per ARL0");
  }
}

double next_control_limit(std::span<CalibrationStep const> history, double arl0, double zeta)
{
  if (history.empty())
    throw ConfigError("next_control_limit: empty history");
  double const target = std::log(arl0);

  // Pool repeated h values, then enforce monotonicity by adjacent-violator
  // pooling (weights = replications).
  struct Point
  {
    double h;
    double y;
    double w;
  };
  std::vector<Point> pts;
  for (auto const& s : history)
    pts.push_back({s.h, std::log(s.estimate.arl), static_cast<double>(s.estimate.replications)});
  std::sort(pts.begin(), pts.end(), [](Point const& a, Point const& b) { return a.h < b.h; });
  std::vector<Point> pooled;
  for (auto const& p : pts)
  {
    if (!pooled.empty() && pooled.back().h == p.h)
    {
      auto& q = pooled.back();
      q.y = (q.y * q.w + p.y * p.w) / (q.w + p.w);
      q.w += p.w;
    }
    else
    {
      pooled.push_back(p);
    }
  }
  std::vector<Point> blocks;
  std::vector<std::size_t> block_size;
  for (auto const& p : pooled)
  {
    blocks.push_back(p);
    block_size.push_back(1);
    while (blocks.size() > 1 && blocks[blocks.size() - 2].y >= blocks.back().y)
    {
      auto b = blocks.back();
      auto n = block_size.back();
      blocks.pop_back();
      block_size.pop_back();
      auto& a = blocks.back();
      a.h = (a.h * a.w + b.h * b.w) / (a.w + b.w);
      a.y = (a.y * a.w + b.y * b.w) / (a.w + b.w);
      a.w += b.w;
      block_size.back() += n;
    }
  }

  double const current = history.back().h;
  double next = current;
  if (blocks.size() == 1)
  {
    double slope = std::max(0.05, siegmund_log_slope(zeta, blocks[0].h));
    next = blocks[0].h + (target - blocks[0].y) / slope;
  }
  else if (target <= blocks.front().y || target >= blocks.back().y)
  {
    bool const below = target <= blocks.front().y;
    auto const& a = below ? blocks[0] : blocks[blocks.size() - 2];
    auto const& b = below ? blocks[1] : blocks.back();
    double slope = (b.y - a.y) / (b.h - a.h);
    double const prior = siegmund_log_slope(zeta, (below ? a : b).h);
    // Var(log ARL estimate) is about 1/replications for near-geometric run lengths.
    double const secant_se = std::sqrt(1 / a.w + 1 / b.w) / (b.h - a.h);
    if (secant_se > 0.25 * prior)
    {
      double const intercept = (a.w * (a.y - prior * a.h) + b.w * (b.y - prior * b.h)) / (a.w + b.w);
      next = (target - intercept) / prior;
    }
    else
    {
      slope = std::clamp(slope, 0.5 * prior, 2 * prior);
      auto const& anchor = below ? a : b;
      next = anchor.h + (target - anchor.y) / slope;
    }
  }
  else
  {
    std::vector<double> hs;
    std::vector<double> ys;
    for (auto const& p : blocks)
    {
      hs.push_back(p.h);
      ys.push_back(p.y);
    }
    auto segment = std::upper_bound(ys.begin(), ys.end(), target) - ys.begin();
    if (hs.size() >= 4)
    {
      using boost::math::interpolators::pchip;
      auto spline = pchip<std::vector<double>>(std::vector<double>(hs), std::vector<double>(ys));
      double lo = hs[segment - 1];
      double hi = hs[segment];
      for (int k = 0; k < 100; ++k)
      {
        double mid = 0.5 * (lo + hi);
        (spline(mid) < target ? lo : hi) = mid;
      }
      next = 0.5 * (lo + hi);
    }
    else
    {
      double t = (target - ys[segment - 1]) / (ys[segment] - ys[segment - 1]);
      next = hs[segment - 1] + t * (hs[segment] - hs[segment - 1]);
    }
  }
  return std::clamp(next, 0.5 * current, 2 * current);
}

//---------------------------------------------------------------------------//
namespace {

IcArlOptions stage_options(CalibrationRequest const& request,
                           CalibrationCell const& cell,
                           std::size_t replications,
                           std::uint64_t stream)
{
  IcArlOptions options;
  options.replications = replications;
  options.seed = request.seed;
  options.side = request.side;
  options.cap = static_cast<std::size_t>(request.cap_multiple * cell.arl0);
  options.drive = request.drive;
  options.stream = stream;
  options.workers = request.workers;
  // A far-off h can make many runs hit the cap; that is information for the
  // search, not an error.
  options.max_cap_rate = 1.0;
  return options;
}

// Censored runs enter at the cap: a lower bound that still pushes h down.
ArlEstimate censored_at_cap(ArlEstimate est)
{
  if (est.capped > 0)
  {
    auto const total = static_cast<double>(est.replications);
    auto const censored = static_cast<double>(est.capped);
    est.arl = (est.arl * (total - censored) + censored * static_cast<double>(est.cap)) / total;
  }
  return est;
}

bool acceptable(ArlEstimate const& est, CalibrationCell const& cell, CalibrationRequest const& request)
{
  return static_cast<double>(est.capped) <= 1e-3 * static_cast<double>(est.replications)
         && within_tolerance(est, cell.arl0, request.tolerance, request.se_multiplier);
}

/*
 * Each cell is searched at request.replications until its estimate is within
 * tolerance, then every further evaluation uses the verification sample size.
 * A cell converges when a verification-size estimate is within tolerance.
 * Without verification (normal stage) the search stops at the first hit.
 */
void search_cells(CalibrationRequest const& request,
                  XiModel const& model,
                  std::vector<CalibrationCell>& cells,
                  std::size_t max_iterations,
                  std::uint64_t stage,
                  bool verify)
{
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    auto& cell = cells[c];
    bool verifying = false;
    for (std::size_t iteration = 1; iteration <= max_iterations; ++iteration)
    {
      std::size_t const reps = verifying ? request.verification_replications : request.replications;
      auto const options = stage_options(request, cell, reps, stream_id(stage * 1'000'003 + c, iteration));
      ArlEstimate const raw = estimate_ic_arl(model, cell.zeta, cell.h, options);
      cell.history.push_back({cell.h, censored_at_cap(raw)});
      cell.iterations = iteration;
      if (verifying)
        cell.achieved = raw;
      if (acceptable(raw, cell, request))
      {
        if (verifying || !verify)
        {
          cell.converged = true;
          break;
        }
        // Re-measure the same h at the verification size.
        verifying = true;
        continue;
      }
      cell.h = next_control_limit(cell.history, cell.arl0, cell.zeta);
    }
  }
}

}  // namespace

CalibrationResult solve_control_limit(CalibrationRequest const& request)
{
  request.validate();
  auto const start = std::chrono::steady_clock::now();

  std::vector<CalibrationCell> cells;
  for (std::size_t z = 0; z < request.zetas.size(); ++z)
  {
    for (std::size_t a = 0; a < request.arl0s.size(); ++a)
    {
      CalibrationCell cell;
      cell.zeta = request.zetas[z];
      cell.arl0 = request.arl0s[a];
      cells.push_back(cell);
    }
  }

  if (request.initial_limits)
  {
    for (std::size_t z = 0; z < request.zetas.size(); ++z)
      for (std::size_t a = 0; a < request.arl0s.size(); ++a)
        cells[z * request.arl0s.size() + a].h = (*request.initial_limits)[z][a];
  }
  else
  {
    // Normal-chart limits seeded from Siegmund's approximation.
    for (auto& cell : cells)
      cell.h = siegmund_limit(cell.zeta, one_sided_target(cell.arl0, request.side));
    if (request.model.kind == XiModel::Kind::signed_rank && request.normal_stage_iterations > 0)
    {
      std::vector<CalibrationCell> normal = cells;
      search_cells(request, XiModel::normal(), normal, request.normal_stage_iterations, kStageNormal, false);
      for (std::size_t c = 0; c < cells.size(); ++c)
        cells[c].h = normal[c].h;
    }
  }
  for (auto& cell : cells)
    cell.initial_h = cell.h;

  search_cells(request, request.model, cells, request.max_iterations, kStageSearch, true);
  for (std::size_t c = 0; c < cells.size(); ++c)
  {
    auto& cell = cells[c];
    if (cell.converged)
      continue;
    // Report the final h at the verification size even when the search ran out.
    auto const options
        = stage_options(request, cell, request.verification_replications, stream_id(kStageVerify * 1'000'003 + c, 0));
    cell.achieved = estimate_ic_arl(request.model, cell.zeta, cell.h, options);
  }

  CalibrationResult result;
  result.model = request.model;
  result.side = request.side;
  result.zetas = request.zetas;
  result.arl0s = request.arl0s;
  result.cells = std::move(cells);
  result.seed = request.seed;
  result.replications = request.replications;
  result.verification_replications = request.verification_replications;
  result.runtime_seconds
      = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

//---------------------------------------------------------------------------//
bool CalibrationResult::monotone() const
{
  for (std::size_t z = 0; z < zetas.size(); ++z)
  {
    for (std::size_t a = 0; a < arl0s.size(); ++a)
    {
      if (z + 1 < zetas.size() && !(cell(z + 1, a).h < cell(z, a).h))
        return false;
      if (a + 1 < arl0s.size() && !(cell(z, a + 1).h > cell(z, a).h))
        return false;
    }
  }
  return true;
}

bool CalibrationResult::all_converged() const
{
  return std::all_of(cells.begin(), cells.end(), [](auto const& c) { return c.converged; });
}

namespace {
std::string model_name(XiModel const& model)
{
  return model.kind == XiModel::Kind::gaussian ? std::string("normal")
                                               : std::string(to_string(model.score));
}
}  // namespace

std::string CalibrationResult::to_text() const
{
  std::ostringstream os;
  os << "# control limits: score " << model_name(model) << ", side " << to_string(side)
     << ", seed " << seed << ", replications " << replications << "/" << verification_replications
     << ", runtime " << std::fixed << std::setprecision(1) << runtime_seconds << " s\n";
  os << "zeta";
  for (double a : arl0s)
    os << '\t' << a;
  os << '\n';
  for (std::size_t z = 0; z < zetas.size(); ++z)
  {
    os << std::setprecision(3) << zetas[z];
    for (std::size_t a = 0; a < arl0s.size(); ++a)
    {
      auto const& c = cell(z, a);
      os << '\t' << std::setprecision(3) << c.h;
      if (!c.converged)
        os << '*';
    }
    os << '\n';
  }
  os.unsetf(std::ios::fixed);
  os << "# achieved ARL (standard error) at the verification sample size; * = unconverged\n";
  for (std::size_t z = 0; z < zetas.size(); ++z)
  {
    os << std::fixed << std::setprecision(3) << zetas[z];
    for (std::size_t a = 0; a < arl0s.size(); ++a)
    {
      auto const& c = cell(z, a);
      os << '\t' << std::setprecision(1) << c.achieved.arl << " (" << c.achieved.standard_error
         << ")";
    }
    os << '\n';
  }
  return os.str();
}

std::string CalibrationResult::to_json() const
{
  nlohmann::json j;
  j["score"] = model_name(model);
  j["side"] = std::string(to_string(side));
  j["zeta"] = zetas;
  j["arl0"] = arl0s;
  j["seed"] = seed;
  j["replications"] = replications;
  j["verification_replications"] = verification_replications;
  j["runtime_seconds"] = runtime_seconds;
  auto grid = [&](auto&& field) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t z = 0; z < zetas.size(); ++z)
    {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t a = 0; a < arl0s.size(); ++a)
        row.push_back(field(cell(z, a)));
      rows.push_back(row);
    }
    return rows;
  };
  j["h"] = grid([](CalibrationCell const& c) { return c.h; });
  j["achieved_arl"] = grid([](CalibrationCell const& c) { return c.achieved.arl; });
  j["standard_error"] = grid([](CalibrationCell const& c) { return c.achieved.standard_error; });
  j["iterations"] = grid([](CalibrationCell const& c) { return c.iterations; });
  j["converged"] = grid([](CalibrationCell const& c) { return c.converged; });
  return j.dump(2);
}

}  // namespace ssr
