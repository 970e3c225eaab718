#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ssr/engine.hpp"
#include "ssr/scores.hpp"
#include "ssr/seqrank.hpp"

namespace ssr {

enum class ChartRole
{
  location,
  dispersion
};

std::string_view to_string(ChartRole role);

/*!
 * Up to four charts over one stream: location (W or VdW) and dispersion (W²),
 * each with an upper and/or lower side.
 */
struct MonitorConfig
{
  ScoreKind location_score = ScoreKind::wilcoxon;
  std::optional<CusumConfig> location;
  std::optional<CusumConfig> dispersion;
  //! Stop at the first signal; otherwise restart the signaling chart and go on.
  bool halt_on_signal = true;

  void validate() const;
  //! {"location": {"score", "zeta", "h", "sides"} | {"zeta_up", ...},
  //!  "dispersion": {...}, "halt": bool}
  static MonitorConfig from_json(std::string const& text);
  std::string to_json() const;
};

struct SignalEvent
{
  ChartRole chart = ChartRole::location;
  Side side = Side::upper;
  std::size_t index = 0;
  std::size_t changepoint_estimate = 0;
  double statistic = 0;

  bool operator==(SignalEvent const&) const = default;
};

//! Per-observation state; charts that are not configured hold no values.
struct MonitorRecord
{
  std::size_t n = 0;
  double x = 0;
  int sign = 0;
  std::size_t rank = 0;
  std::optional<double> xi_location;
  std::optional<double> xi_dispersion;
  std::optional<double> location_up;
  std::optional<double> location_down;
  std::optional<double> dispersion_up;
  std::optional<double> dispersion_down;
  std::vector<SignalEvent> signals;

  bool operator==(MonitorRecord const&) const = default;
};

class Monitor
{
public:
  explicit Monitor(MonitorConfig config);

  MonitorRecord push(double x);

  MonitorConfig const& config() const { return config_; }
  std::vector<SignalEvent> const& signals() const { return signals_; }
  std::size_t count() const { return ranks_.count(); }
  std::size_t zero_differences() const { return zeros_; }
  bool halted() const { return halted_; }

private:
  MonitorConfig config_;
  ScoreSpec location_score_;
  RankAccumulator ranks_;
  std::optional<CusumChart> location_;
  std::optional<CusumChart> dispersion_;
  std::vector<SignalEvent> signals_;
  std::size_t zeros_ = 0;
  bool halted_ = false;
};

//! Tab-delimited record stream with a header; optional fields print as "-".
void write_record_header(std::ostream& out, MonitorConfig const& config);
void write_record(std::ostream& out, MonitorRecord const& record);
std::vector<MonitorRecord> read_records(std::istream& in);

//! Human-readable end-of-stream summary.
std::string monitor_report(Monitor const& monitor);

}  // namespace ssr
