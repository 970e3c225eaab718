#include "ssr/monitor.hpp"

#include <sstream>

#include <json.hpp>

#include "ssr/error.hpp"
#include "ssr/io.hpp"

namespace ssr {
namespace {

using nlohmann::json;

CusumConfig chart_from_json(json const& j, std::string const& what)
{
  CusumConfig c;
  c.sides = parse_sides(j.value("sides", std::string("both")));
  auto number = [&](char const* key) -> std::optional<double> {
    if (!j.contains(key))
      return std::nullopt;
    return j.at(key).get<double>();
  };
  auto const zeta = number("zeta");
  auto const h = number("h");
  c.zeta_up = number("zeta_up").value_or(zeta.value_or(-1));
  c.zeta_down = number("zeta_down").value_or(zeta.value_or(-1));
  auto const h_up = number("h_up").value_or(h.value_or(-1));
  auto const h_down = number("h_down").value_or(h.value_or(-1));
  if (c.has_upper() && (c.zeta_up < 0 || h_up < 0))
    throw ConfigError(what + " chart: upper side needs a reference value and a control limit");
  if (c.has_lower() && (c.zeta_down < 0 || h_down < 0))
    throw ConfigError(what + " chart: lower side needs a reference value and a control limit");
  c.h_up = c.has_upper() ? h_up : 1;
  c.h_down = c.has_lower() ? h_down : 1;
  c.zeta_up = std::max(0.0, c.zeta_up);
  c.zeta_down = std::max(0.0, c.zeta_down);
  return c;
}

json chart_to_json(CusumConfig const& c)
{
  json j;
  j["sides"] = std::string(to_string(c.sides));
  if (c.has_upper())
  {
    j["zeta_up"] = c.zeta_up;
    j["h_up"] = c.h_up;
  }
  if (c.has_lower())
  {
    j["zeta_down"] = c.zeta_down;
    j["h_down"] = c.h_down;
  }
  return j;
}

std::string optional_text(std::optional<double> const& v)
{
  return v ? format_double(*v) : "-";
}

std::optional<double> parse_optional(std::string const& text)
{
  if (text == "-")
    return std::nullopt;
  return parse_double(text);
}

std::string events_text(std::vector<SignalEvent> const& events)
{
  if (events.empty())
    return "-";
  std::string out;
  for (auto const& e : events)
  {
    if (!out.empty())
      out += ';';
    out += std::string(to_string(e.chart)) + '/' + std::string(to_string(e.side)) + '/'
           + std::to_string(e.changepoint_estimate) + '/' + format_double(e.statistic);
  }
  return out;
}

Side parse_side(std::string_view text)
{
  if (text == "upper")
    return Side::upper;
  if (text == "lower")
    return Side::lower;
  throw InputError("unknown side '" + std::string(text) + "'");
}

std::vector<SignalEvent> parse_events(std::string const& text, std::size_t n)
{
  std::vector<SignalEvent> events;
  if (text == "-")
    return events;
  std::istringstream list(text);
  std::string item;
  while (std::getline(list, item, ';'))
  {
    std::istringstream parts(item);
    std::string chart, side, cp, stat;
    if (!std::getline(parts, chart, '/') || !std::getline(parts, side, '/') || !std::getline(parts, cp, '/')
        || !std::getline(parts, stat))
      throw InputError("malformed signal field '" + item + "'");
    SignalEvent e;
    if (chart == "location")
      e.chart = ChartRole::location;
    else if (chart == "dispersion")
      e.chart = ChartRole::dispersion;
    else
      throw InputError("unknown chart '" + chart + "'");
    e.side = parse_side(side);
    e.index = n;
    e.changepoint_estimate = std::stoull(cp);
    e.statistic = parse_double(stat);
    events.push_back(e);
  }
  return events;
}

}  // namespace

std::string_view to_string(ChartRole role)
{
  return role == ChartRole::location ? "location" : "dispersion";
}

//---------------------------------------------------------------------------//
void MonitorConfig::validate() const
{
  if (!location && !dispersion)
    throw ConfigError("monitor: configure at least one chart");
  if (!is_location(location_score))
    throw ConfigError("monitor: the location chart needs the w or vdw score");
  if (location)
    location->validate();
  if (dispersion)
    dispersion->validate();
}

MonitorConfig MonitorConfig::from_json(std::string const& text)
{
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (json::exception const& e)
  {
    throw ConfigError(std::string("monitor config: ") + e.what());
  }
  MonitorConfig c;
  try
  {
    if (j.contains("location"))
    {
      auto const& loc = j.at("location");
      c.location_score = parse_score_kind(loc.value("score", std::string("w")));
      c.location = chart_from_json(loc, "location");
    }
    if (j.contains("dispersion"))
      c.dispersion = chart_from_json(j.at("dispersion"), "dispersion");
    c.halt_on_signal = j.value("halt", true);
  }
  catch (json::exception const& e)
  {
    throw ConfigError(std::string("monitor config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string MonitorConfig::to_json() const
{
  json j;
  if (location)
  {
    j["location"] = chart_to_json(*location);
    j["location"]["score"] = std::string(to_string(location_score));
  }
  if (dispersion)
    j["dispersion"] = chart_to_json(*dispersion);
  j["halt"] = halt_on_signal;
  return j.dump(2);
}

//---------------------------------------------------------------------------//
Monitor::Monitor(MonitorConfig config)
    : config_(std::move(config)), location_score_(config_.location_score)
{
  config_.validate();
  if (config_.location)
    location_.emplace(*config_.location);
  if (config_.dispersion)
    dispersion_.emplace(*config_.dispersion);
}

MonitorRecord Monitor::push(double x)
{
  if (halted_)
    throw ConfigError("monitor has halted after a signal");
  SignedRank const sr = ranks_.push(x);
  if (sr.sign == 0)
    ++zeros_;
  MonitorRecord rec;
  rec.n = sr.index;
  rec.x = x;
  rec.sign = sr.sign;
  rec.rank = sr.rank;

  auto advance = [&](CusumChart& chart, ChartRole role, double xi, std::optional<double>& up,
                     std::optional<double>& down) {
    auto const side = chart.step(xi);
    auto const& state = chart.state();
    if (chart.config().has_upper())
      up = state.d_up;
    if (chart.config().has_lower())
      down = state.d_down;
    if (side)
    {
      SignalEvent e;
      e.chart = role;
      e.side = *side;
      e.index = sr.index;
      e.changepoint_estimate = chart.changepoint_estimate(*side);
      e.statistic = *side == Side::upper ? state.d_up : state.d_down;
      rec.signals.push_back(e);
      signals_.push_back(e);
      if (!config_.halt_on_signal)
        chart.reset();
    }
  };

  if (location_)
  {
    rec.xi_location = location_score_.xi_location(sr.index, sr.sign, sr.rank);
    advance(*location_, ChartRole::location, *rec.xi_location, rec.location_up, rec.location_down);
  }
  if (dispersion_)
  {
    rec.xi_dispersion = xi_dispersion(sr.index, sr.rank);
    advance(*dispersion_, ChartRole::dispersion, *rec.xi_dispersion, rec.dispersion_up, rec.dispersion_down);
  }
  if (!rec.signals.empty() && config_.halt_on_signal)
    halted_ = true;
  return rec;
}

//---------------------------------------------------------------------------//
void write_record_header(std::ostream& out, MonitorConfig const& config)
{
  out << "# limits";
  if (config.location)
  {
    if (config.location->has_upper())
      out << " location_up=" << format_double(config.location->h_up);
    if (config.location->has_lower())
      out << " location_down=" << format_double(-config.location->h_down);
  }
  if (config.dispersion)
  {
    if (config.dispersion->has_upper())
      out << " dispersion_up=" << format_double(config.dispersion->h_up);
    if (config.dispersion->has_lower())
      out << " dispersion_down=" << format_double(-config.dispersion->h_down);
  }
  out << "\nn\tx\tsign\trank\txi_location\txi_dispersion\tlocation_up\tlocation_down"
         "\tdispersion_up\tdispersion_down\tsignals\n";
}

void write_record(std::ostream& out, MonitorRecord const& r)
{
  out << r.n << '\t' << format_double(r.x) << '\t' << r.sign << '\t' << r.rank << '\t'
      << optional_text(r.xi_location) << '\t' << optional_text(r.xi_dispersion) << '\t'
      << optional_text(r.location_up) << '\t' << optional_text(r.location_down) << '\t'
      << optional_text(r.dispersion_up) << '\t' << optional_text(r.dispersion_down) << '\t'
      << events_text(r.signals) << '\n';
}

std::vector<MonitorRecord> read_records(std::istream& in)
{
  std::vector<MonitorRecord> out;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.empty() || line.front() == '#')
      continue;
    if (!header)
    {
      header = true;
      if (line.rfind("n\t", 0) == 0)
        continue;
    }
    std::vector<std::string> f;
    std::istringstream fields(line);
    std::string item;
    while (std::getline(fields, item, '\t'))
      f.push_back(item);
    if (f.size() != 11)
      throw InputError("records:" + std::to_string(line_no) + ": expected 11 fields");
    try
    {
      MonitorRecord r;
      r.n = std::stoull(f[0]);
      r.x = parse_double(f[1]);
      r.sign = std::stoi(f[2]);
      r.rank = std::stoull(f[3]);
      r.xi_location = parse_optional(f[4]);
      r.xi_dispersion = parse_optional(f[5]);
      r.location_up = parse_optional(f[6]);
      r.location_down = parse_optional(f[7]);
      r.dispersion_up = parse_optional(f[8]);
      r.dispersion_down = parse_optional(f[9]);
      r.signals = parse_events(f[10], r.n);
      out.push_back(std::move(r));
    }
    catch (std::logic_error const& e)
    {
      throw InputError("records:" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string monitor_report(Monitor const& monitor)
{
  std::ostringstream os;
  os << "observations\t" << monitor.count() << '\n';
  if (monitor.signals().empty())
  {
    os << "signal\tnone\n";
  }
  for (auto const& e : monitor.signals())
  {
    os << "signal\t" << to_string(e.chart) << ' ' << to_string(e.side) << "\tN=" << e.index
       << "\tchangepoint=" << e.changepoint_estimate << "\tstatistic=" << format_double(e.statistic)
       << '\n';
  }
  if (monitor.zero_differences() > 0)
  {
    os << "# warning: " << monitor.zero_differences()
       << " zero differences were scored with sign 0 (no contribution to the location chart)\n";
  }
  return os.str();
}

}  // namespace ssr
