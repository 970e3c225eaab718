#include "ssr/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssr/arl_lab.hpp"
#include "ssr/calibrate.hpp"
#include "ssr/distlab.hpp"
#include "ssr/error.hpp"
#include "ssr/experiments.hpp"
#include "ssr/io.hpp"
#include "ssr/monitor.hpp"
#include "ssr/phase1.hpp"

namespace ssr {
namespace {

using nlohmann::json;

// Input from a path or, for "-", the caller's stream.
class InputSource
{
public:
  InputSource(std::string const& path, std::istream& fallback) : name_(path)
  {
    if (path == "-")
    {
      stream_ = &fallback;
      name_ = "stdin";
      return;
    }
    file_ = std::make_unique<std::ifstream>(path);
    if (!*file_)
      throw InputError("cannot open '" + path + "'");
    stream_ = file_.get();
  }
  std::istream& stream() { return *stream_; }
  std::string const& name() const { return name_; }

private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
  std::string name_;
};

// Output to a path, or to the caller's stream when the path is empty or "-".
class OutputSink
{
public:
  OutputSink(std::string const& path, std::ostream& fallback)
  {
    if (path.empty() || path == "-")
    {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path);
    if (!*file_)
      throw InputError("cannot write '" + path + "'");
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::string slurp(std::string const& path, std::istream& fallback)
{
  InputSource source(path, fallback);
  std::ostringstream os;
  os << source.stream().rdbuf();
  return os.str();
}

XiModel parse_model(std::string const& text)
{
  if (text == "normal")
    return XiModel::normal();
  return XiModel::ranks(parse_score_kind(text));
}

//---------------------------------------------------------------------------//
struct MonitorArgs
{
  std::string input = "-";
  std::string config;
  std::string output;
  std::string format = "text";
  std::string score = "w";
  std::optional<double> zeta;
  std::optional<double> h;
  std::optional<double> target_shift;
  double theta0 = presets::theta0_near_normal;
  bool two_sided = false;
  std::optional<double> disp_zeta_up;
  std::optional<double> disp_zeta_down;
  std::optional<double> disp_h_up;
  std::optional<double> disp_h_down;
  std::optional<double> alpha;
  double theta1 = presets::theta1_default;
  bool keep_going = false;
};

MonitorConfig monitor_config(MonitorArgs const& a, std::istream& in)
{
  MonitorConfig config;
  if (!a.config.empty())
  {
    config = MonitorConfig::from_json(slurp(a.config, in));
    if (a.keep_going)
      config.halt_on_signal = false;
    return config;
  }
  config.halt_on_signal = !a.keep_going;
  auto const kind = parse_score_kind(a.score);
  bool const any_dispersion = a.disp_zeta_up || a.disp_zeta_down || a.disp_h_up || a.disp_h_down || a.alpha;
  if (is_location(kind))
  {
    std::optional<double> zeta = a.zeta;
    if (!zeta && a.target_shift)
      zeta = design_location(a.theta0, *a.target_shift, kind).zeta;
    if (zeta || a.h)
    {
      if (!zeta || !a.h)
        throw ConfigError("location chart needs both a reference value (--zeta or --target-shift) and --h");
      config.location_score = kind;
      config.location = CusumConfig::symmetric(*zeta, *a.h, a.two_sided ? Sides::both : Sides::upper);
    }
  }
  else if (a.zeta || a.h)
  {
    // --score w2 puts --zeta/--h on the dispersion chart.
    if (!a.zeta || !a.h)
      throw ConfigError("dispersion chart needs both --zeta and --h");
    config.dispersion = CusumConfig::symmetric(*a.zeta, *a.h, a.two_sided ? Sides::both : Sides::upper);
  }
  if (any_dispersion)
  {
    if (config.dispersion)
      throw ConfigError("dispersion chart configured twice");
    std::optional<double> up = a.disp_zeta_up;
    std::optional<double> down = a.disp_zeta_down;
    if (a.alpha)
    {
      auto const d = design_dispersion(a.theta1, *a.alpha);
      up = up.value_or(d.zeta_up);
      down = down.value_or(d.zeta_down);
    }
    CusumConfig c;
    bool const has_up = up && a.disp_h_up;
    bool const has_down = down && a.disp_h_down;
    if (!has_up && !has_down)
      throw ConfigError("dispersion chart needs a reference value and a control limit for at least one side");
    c.sides = has_up && has_down ? Sides::both : has_up ? Sides::upper : Sides::lower;
    c.zeta_up = up.value_or(0);
    c.zeta_down = down.value_or(0);
    c.h_up = a.disp_h_up.value_or(1);
    c.h_down = a.disp_h_down.value_or(1);
    config.dispersion = c;
  }
  config.validate();
  return config;
}

int cmd_monitor(MonitorArgs const& a, std::istream& in, std::ostream& out, std::ostream& err)
{
  if (a.format != "text" && a.format != "records")
    throw ConfigError("--format must be text or records");
  Monitor monitor(monitor_config(a, in));
  InputSource source(a.input, in);
  ObservationReader reader(source.stream(), source.name());
  std::unique_ptr<OutputSink> path_file;
  if (!a.output.empty())
  {
    path_file = std::make_unique<OutputSink>(a.output, out);
    write_record_header(path_file->stream(), monitor.config());
  }
  if (a.format == "records")
    write_record_header(out, monitor.config());
  while (auto obs = reader.next())
  {
    auto const rec = monitor.push(obs->x);
    if (path_file)
      write_record(path_file->stream(), rec);
    if (a.format == "records")
      write_record(out, rec);
    if (monitor.halted())
      break;
  }
  std::ostream& report = a.format == "records" ? err : out;
  report << monitor_report(monitor);
  return monitor.signals().empty() ? exit_ok : exit_signal;
}

//---------------------------------------------------------------------------//
struct CalibrateArgs
{
  std::string score = "w";
  std::string zetas = "0.1..0.5";
  std::string arl0s = "500";
  bool two_sided = false;
  std::string side = "upper";
  std::size_t reps = 10'000;
  std::size_t verify_reps = 100'000;
  std::uint64_t seed = 20240601;
  std::size_t max_iterations = 10;
  double tolerance = 3;
  std::string output;
  std::string format = "text";
  unsigned workers = 0;
};

int cmd_calibrate(CalibrateArgs const& a, std::ostream& out)
{
  CalibrationRequest request;
  request.model = parse_model(a.score);
  request.zetas = parse_number_list(a.zetas);
  request.arl0s = parse_number_list(a.arl0s);
  request.side = a.two_sided ? Sides::both : parse_sides(a.side);
  request.replications = a.reps;
  request.verification_replications = a.verify_reps;
  request.seed = a.seed;
  request.max_iterations = a.max_iterations;
  request.tolerance = a.tolerance;
  request.workers = a.workers;
  auto const result = solve_control_limit(request);
  OutputSink sink(a.output, out);
  if (a.format == "json")
    sink.stream() << result.to_json() << '\n';
  else if (a.format == "text")
    sink.stream() << result.to_text();
  else
    throw ConfigError("--format must be text or json");
  return exit_ok;
}

//---------------------------------------------------------------------------//
struct ThetaArgs
{
  std::string dist;
  std::string input;
  std::string score = "w";
  std::string sigma = "sd";
  std::optional<double> bandwidth;
  double target_shift = 0.5;
  double alpha = 0.5;
  std::string format = "text";
};

int cmd_theta(ThetaArgs const& a, std::istream& in, std::ostream& out)
{
  if (a.dist.empty() == a.input.empty())
    throw ConfigError("theta: give exactly one of --dist or --input");
  auto const kind = parse_score_kind(a.score);
  json j;
  std::ostringstream text;
  text << std::setprecision(6);
  if (!a.dist.empty())
  {
    auto const dist = Distribution::parse(a.dist);
    j["distribution"] = dist.name();
    text << "distribution\t" << dist.name() << '\n';
    if (is_location(kind))
    {
      auto const t0 = theta0(ScoreSpec(kind), dist);
      j["score"] = std::string(to_string(kind));
      j["theta0"] = t0.diverges ? json("inf") : json(t0.theta);
      j["theta0_diverges"] = t0.diverges;
      text << "theta0(" << to_string(kind) << ")\t" << (t0.diverges ? std::string("inf (diverges)") : format_double(t0.theta))
           << '\n';
    }
    auto const t1 = theta1(dist);
    j["theta1"] = t1.theta;
    text << "theta1\t" << t1.theta << '\n';
  }
  else
  {
    InputSource source(a.input, in);
    auto const data = ObservationReader(source.stream(), source.name()).read_all();
    Phase1Request request;
    request.score = kind;
    request.kde.sigma = parse_sigma_method(a.sigma);
    request.kde.bandwidth = a.bandwidth;
    request.target_shift = a.target_shift;
    request.alpha = a.alpha;
    auto const design = design_from_phase1(data, request);
    j = {{"points", data.size()},
         {"sigma_hat", design.sigma_hat},
         {"bandwidth", design.bandwidth},
         {"theta0_hat", design.theta0_hat},
         {"theta1_hat", design.theta1_hat},
         {"zeta_location", design.location.zeta},
         {"zeta_up", design.dispersion.zeta_up},
         {"zeta_down", design.dispersion.zeta_down}};
    if (design.location.warning)
      j["warning"] = *design.location.warning;
    text << "points\t" << data.size() << '\n' << design.to_text();
  }
  if (a.format == "json")
    out << j.dump(2) << '\n';
  else
    out << text.str();
  return exit_ok;
}

//---------------------------------------------------------------------------//
struct ArlArgs
{
  std::string scenario;
  std::string manifest;
  std::string dist = "normal";
  std::string score = "w";
  double shift = 0;
  std::optional<double> scale;
  std::size_t tau = 0;
  std::optional<double> zeta;
  std::optional<double> h;
  bool two_sided = false;
  std::size_t reps = 10'000;
  std::uint64_t seed = 1;
  std::string output;
  std::string format = "text";
  unsigned workers = 0;
};

int cmd_arl(ArlArgs const& a, std::istream& in, std::ostream& out)
{
  OutputSink sink(a.output, out);
  if (!a.scenario.empty() || !a.manifest.empty())
  {
    json manifest = !a.scenario.empty() ? preset_manifest(a.scenario) : json::parse(slurp(a.manifest, in));
    auto const result = run_manifest(manifest);
    if (a.format == "json")
      sink.stream() << result.results.dump(2) << '\n';
    else
      sink.stream() << result.text;
    return exit_ok;
  }
  if (!a.zeta || !a.h)
    throw ConfigError("arl: give --scenario, --manifest, or --zeta and --h");
  auto const kind = parse_score_kind(a.score);
  ShiftScenario scenario;
  scenario.base = Distribution::parse(a.dist);
  scenario.tau = a.tau;
  if (a.scale)
    scenario.change = ScaleChange{*a.scale};
  else
    scenario.change = LocationShift{a.shift};
  OocOptions options;
  options.replications = a.reps;
  options.seed = a.seed;
  options.workers = a.workers;
  auto const config = CusumConfig::symmetric(*a.zeta, *a.h, a.two_sided ? Sides::both : Sides::upper);
  auto const e = ooc_arl(scenario, kind, config, options);
  if (a.format == "json")
  {
    sink.stream() << json{{"arl", e.arl},
                          {"se", e.standard_error},
                          {"used", e.used},
                          {"discarded", e.discarded},
                          {"capped", e.capped},
                          {"reps", a.reps},
                          {"seed", a.seed}}
                         .dump(2)
                  << '\n';
  }
  else
  {
    sink.stream() << "arl\t" << e.arl << "\nse\t" << e.standard_error << "\nused\t" << e.used << "\ndiscarded\t"
                  << e.discarded << "\n# reps " << a.reps << ", seed " << a.seed << '\n';
  }
  return exit_ok;
}

//---------------------------------------------------------------------------//
struct SimulateArgs
{
  std::string dist = "normal";
  std::size_t n = 100;
  std::size_t tau = 0;
  double shift = 0;
  double scale = 1;
  double sd = 1;
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_simulate(SimulateArgs const& a, std::ostream& out)
{
  auto const dist = Distribution::parse(a.dist);
  if (!(a.sd > 0) || !(a.scale > 0))
    throw DomainError("--sd and --scale must be positive");
  Rng rng(a.seed, 0);
  OutputSink sink(a.output, out);
  sink.stream() << "# " << dist.name() << ", sd " << format_double(a.sd) << ", change after " << a.tau
                << ": shift " << format_double(a.shift) << ", scale " << format_double(a.scale) << '\n';
  for (std::size_t i = 1; i <= a.n; ++i)
  {
    double x = a.sd * dist.sample(rng);
    if (i > a.tau)
      x = x * a.scale + a.shift;
    sink.stream() << format_double(x) << '\n';
  }
  return exit_ok;
}

}  // namespace

//---------------------------------------------------------------------------//
std::vector<double> parse_number_list(std::string const& text)
{
  std::vector<double> out;
  auto const range = text.find("..");
  if (range != std::string::npos)
  {
    double const lo = parse_double(text.substr(0, range));
    std::string rest = text.substr(range + 2);
    double step = 0.05;
    if (auto colon = rest.find(':'); colon != std::string::npos)
    {
      step = parse_double(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    double const hi = parse_double(rest);
    if (!(step > 0) || hi < lo)
      throw InputError("bad range '" + text + "'");
    auto const count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::size_t k = 0; k <= count; ++k)
      out.push_back(std::round((lo + static_cast<double>(k) * step) * 1e12) / 1e12);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    if (!item.empty())
      out.push_back(parse_double(item));
  }
  if (out.empty())
    throw InputError("empty number list");
  return out;
}

int run_cli(std::vector<std::string> const& args, std::istream& in, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Signed sequential rank CUSUM charts"};
  app.require_subcommand(1);
  // "-h" is free for the control limit.
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", "ssrcusum 0.1.0");
  unsigned workers = 0;
  app.add_option("--workers", workers, "Worker threads (default: SSR_WORKERS or all cores)");

  MonitorArgs monitor;
  auto* m = app.add_subcommand("monitor", "Run location and dispersion charts over a data stream");
  m->add_option("--input,-i", monitor.input, "Observations: one value or a pair per line ('-' = stdin)");
  m->add_option("--config,-c", monitor.config, "JSON chart configuration");
  m->add_option("--output,-o", monitor.output, "Path file with one record per observation");
  m->add_option("--format", monitor.format, "stdout format: text or records");
  m->add_option("--score", monitor.score, "w, vdw (location chart) or w2 (dispersion chart)");
  m->add_option("--zeta", monitor.zeta, "Reference value");
  m->add_option("--h", monitor.h, "Control limit");
  m->add_option("--target-shift", monitor.target_shift, "Target shift in sigma units; sets zeta = theta0 * shift / 2");
  m->add_option("--theta0", monitor.theta0, "theta0 used with --target-shift");
  m->add_flag("--two-sided", monitor.two_sided, "Run both sides of the chart");
  m->add_option("--disp-zeta-up", monitor.disp_zeta_up, "Dispersion chart upper reference value");
  m->add_option("--disp-zeta-down", monitor.disp_zeta_down, "Dispersion chart lower reference value (magnitude)");
  m->add_option("--disp-h-up", monitor.disp_h_up, "Dispersion chart upper control limit");
  m->add_option("--disp-h-down", monitor.disp_h_down, "Dispersion chart lower control limit (magnitude)");
  m->add_option("--alpha", monitor.alpha, "Fractional change in sigma; sets missing dispersion reference values");
  m->add_option("--theta1", monitor.theta1, "theta1 used with --alpha");
  m->add_flag("--continue", monitor.keep_going, "Restart a chart after it signals instead of halting");

  CalibrateArgs calibrate;
  auto* c = app.add_subcommand("calibrate", "Monte Carlo control limits for target in-control ARLs");
  c->add_option("--score", calibrate.score, "w, vdw, w2 or normal");
  c->add_option("--zeta", calibrate.zetas, "Reference values: list or a..b[:step]");
  c->add_option("--arl0", calibrate.arl0s, "Target in-control ARLs: list or a..b[:step]");
  c->add_flag("--two-sided", calibrate.two_sided, "Calibrate a two-sided chart");
  c->add_option("--side", calibrate.side, "upper or lower (one-sided charts)");
  c->add_option("--reps", calibrate.reps, "Replications per search iteration");
  c->add_option("--verify-reps", calibrate.verify_reps, "Replications of the verification pass");
  c->add_option("--seed", calibrate.seed, "Random seed");
  c->add_option("--max-iter", calibrate.max_iterations, "Iteration budget per cell");
  c->add_option("--tolerance", calibrate.tolerance, "Absolute ARL tolerance");
  c->add_option("--output,-o", calibrate.output, "Output file");
  c->add_option("--format", calibrate.format, "text or json");

  ThetaArgs theta;
  auto* t = app.add_subcommand("theta", "theta0/theta1 for a distribution, or a Phase-I design from data");
  t->add_option("--dist", theta.dist, "normal, t<nu>[:iqr|sd|raw], sn<lambda>, uniform");
  t->add_option("--input,-i", theta.input, "Phase-I data ('-' = stdin)");
  t->add_option("--score", theta.score, "w or vdw");
  t->add_option("--sigma", theta.sigma, "sd or iqr");
  t->add_option("--bandwidth", theta.bandwidth, "KDE bandwidth in data units");
  t->add_option("--target-shift", theta.target_shift, "Target shift for the recommended zeta");
  t->add_option("--alpha", theta.alpha, "Fractional sigma change for the dispersion design");
  t->add_option("--format", theta.format, "text or json");

  ArlArgs arl;
  auto* r = app.add_subcommand("arl", "Out-of-control ARL experiments");
  r->add_option("--scenario", arl.scenario, "Preset: table2, table2-tau100, tableS2.2, table3, table4.1, table4.2");
  r->add_option("--manifest", arl.manifest, "JSON experiment manifest");
  r->add_option("--dist", arl.dist, "In-control distribution");
  r->add_option("--score", arl.score, "w, vdw or w2");
  r->add_option("--target-shift,--shift", arl.shift, "Location shift after tau");
  r->add_option("--scale", arl.scale, "Scale factor after tau (instead of a shift)");
  r->add_option("--tau", arl.tau, "Changepoint");
  r->add_option("--zeta", arl.zeta, "Reference value");
  r->add_option("--h", arl.h, "Control limit");
  r->add_flag("--two-sided", arl.two_sided, "Two-sided chart");
  r->add_option("--reps", arl.reps, "Replications");
  r->add_option("--seed", arl.seed, "Random seed");
  r->add_option("--output,-o", arl.output, "Output file");
  r->add_option("--format", arl.format, "text or json");

  SimulateArgs simulate;
  auto* s = app.add_subcommand("simulate", "Generate a data stream with a change");
  s->add_option("--dist", simulate.dist, "Standardized distribution");
  s->add_option("--n", simulate.n, "Number of observations");
  s->add_option("--tau", simulate.tau, "Last in-control index");
  s->add_option("--target-shift,--shift", simulate.shift, "Mean shift after tau (data units)");
  s->add_option("--scale", simulate.scale, "Scale factor after tau");
  s->add_option("--sd", simulate.sd, "Standard deviation of the in-control data");
  s->add_option("--seed", simulate.seed, "Random seed");
  s->add_option("--output,-o", simulate.output, "Output file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (CLI::CallForHelp const&)
  {
    out << app.help();
    return exit_ok;
  }
  catch (CLI::CallForVersion const& e)
  {
    out << e.what() << '\n';
    return exit_ok;
  }
  catch (CLI::ParseError const& e)
  {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }

  try
  {
    calibrate.workers = workers;
    arl.workers = workers;
    if (m->parsed())
      return cmd_monitor(monitor, in, out, err);
    if (c->parsed())
      return cmd_calibrate(calibrate, out);
    if (t->parsed())
      return cmd_theta(theta, in, out);
    if (r->parsed())
      return cmd_arl(arl, in, out);
    if (s->parsed())
      return cmd_simulate(simulate, out);
  }
  catch (std::exception const& e)
  {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
  return exit_error;
}

}  // namespace ssr
