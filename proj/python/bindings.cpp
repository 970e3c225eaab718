#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ssr/arl_lab.hpp"
#include "ssr/calibrate.hpp"
#include "ssr/cli.hpp"
#include "ssr/distlab.hpp"
#include "ssr/error.hpp"
#include "ssr/monitor.hpp"
#include "ssr/phase1.hpp"
#include "ssr/scores.hpp"
#include "ssr/seqrank.hpp"

namespace py = pybind11;
using namespace ssr;

namespace {

CusumConfig chart(double zeta, double h, bool two_sided)
{
  return CusumConfig::symmetric(zeta, h, two_sided ? Sides::both : Sides::upper);
}

py::dict estimate_dict(OocArlEstimate const& e)
{
  py::dict d;
  d["arl"] = e.arl;
  d["standard_error"] = e.standard_error;
  d["used"] = e.used;
  d["discarded"] = e.discarded;
  d["capped"] = e.capped;
  return d;
}

py::object optional_value(std::optional<double> const& v)
{
  return v ? py::object(py::float_(*v)) : py::object(py::none());
}

py::dict record_dict(MonitorRecord const& r)
{
  py::dict d;
  d["n"] = r.n;
  d["x"] = r.x;
  d["sign"] = r.sign;
  d["rank"] = r.rank;
  d["xi_location"] = optional_value(r.xi_location);
  d["xi_dispersion"] = optional_value(r.xi_dispersion);
  d["location_up"] = optional_value(r.location_up);
  d["location_down"] = optional_value(r.location_down);
  d["dispersion_up"] = optional_value(r.dispersion_up);
  d["dispersion_down"] = optional_value(r.dispersion_down);
  py::list signals;
  for (auto const& s : r.signals)
  {
    py::dict e;
    e["chart"] = std::string(to_string(s.chart));
    e["side"] = std::string(to_string(s.side));
    e["index"] = s.index;
    e["changepoint_estimate"] = s.changepoint_estimate;
    e["statistic"] = s.statistic;
    signals.append(e);
  }
  d["signals"] = signals;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Signed sequential rank CUSUM charts";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<KindMismatch>(m, "KindMismatch", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

  m.def("inverse_normal_cdf", &inverse_normal_cdf, py::arg("p"));

  m.def(
      "xi_location",
      [](std::string const& score, std::size_t i, int sign, std::size_t rank) {
        return ScoreSpec(parse_score_kind(score)).xi_location(i, sign, rank);
      },
      py::arg("score"), py::arg("i"), py::arg("sign"), py::arg("rank"));
  m.def("xi_dispersion", &xi_dispersion, py::arg("i"), py::arg("rank"));

  m.def(
      "theta0",
      [](std::string const& score, std::string const& dist) {
        return theta0(ScoreSpec(parse_score_kind(score)), Distribution::parse(dist)).theta;
      },
      py::arg("score"), py::arg("dist"));
  m.def(
      "theta1", [](std::string const& dist) { return theta1(Distribution::parse(dist)).theta; }, py::arg("dist"));

  py::class_<RankAccumulator>(m, "RankAccumulator")
      .def(py::init<>())
      .def("push",
           [](RankAccumulator& acc, double x) {
             auto const r = acc.push(x);
             return py::make_tuple(r.sign, r.rank, r.index);
           })
      .def("reset", &RankAccumulator::reset)
      .def("__len__", &RankAccumulator::count);

  m.def(
      "estimate_ic_arl",
      [](std::string const& score, double zeta, double h, std::size_t replications, std::uint64_t seed,
         std::string const& side) {
        IcArlOptions options;
        options.replications = replications;
        options.seed = seed;
        options.side = parse_sides(side);
        auto const e = estimate_ic_arl(parse_score_kind(score), zeta, h, options);
        py::dict d;
        d["arl"] = e.arl;
        d["standard_error"] = e.standard_error;
        d["replications"] = e.replications;
        d["capped"] = e.capped;
        return d;
      },
      py::arg("score"), py::arg("zeta"), py::arg("h"), py::arg("replications") = 100'000, py::arg("seed") = 1,
      py::arg("side") = "upper");

  m.def(
      "calibrate_json",
      [](std::string const& score, std::vector<double> zetas, std::vector<double> arl0s, std::size_t replications,
         std::size_t verification_replications, std::uint64_t seed, std::string const& side) {
        CalibrationRequest request;
        request.model = score == "normal" ? XiModel::normal() : XiModel::ranks(parse_score_kind(score));
        request.zetas = std::move(zetas);
        request.arl0s = std::move(arl0s);
        request.replications = replications;
        request.verification_replications = verification_replications;
        request.seed = seed;
        request.side = parse_sides(side);
        py::gil_scoped_release release;
        return solve_control_limit(request).to_json();
      },
      py::arg("score"), py::arg("zetas"), py::arg("arl0s"), py::arg("replications") = 10'000,
      py::arg("verification_replications") = 100'000, py::arg("seed") = 20240601, py::arg("side") = "upper");

  m.def(
      "ooc_arl",
      [](std::string const& dist, std::string const& score, double delta, std::size_t tau, double zeta, double h,
         bool two_sided, std::size_t replications, std::uint64_t seed) {
        OocOptions options;
        options.replications = replications;
        options.seed = seed;
        ShiftScenario const scenario{Distribution::parse(dist), LocationShift{delta}, tau};
        return estimate_dict(ooc_arl(scenario, parse_score_kind(score), chart(zeta, h, two_sided), options));
      },
      py::arg("dist"), py::arg("score"), py::arg("delta"), py::arg("tau"), py::arg("zeta"), py::arg("h"),
      py::arg("two_sided") = false, py::arg("replications") = 10'000, py::arg("seed") = 1);

  m.def(
      "normal_oracle_arl",
      [](double delta_effective, std::size_t tau, double zeta, double h, std::size_t replications,
         std::uint64_t seed) {
        OocOptions options;
        options.replications = replications;
        options.seed = seed;
        return estimate_dict(normal_oracle_arl(delta_effective, chart(zeta, h, false), tau, options));
      },
      py::arg("delta_effective"), py::arg("tau"), py::arg("zeta"), py::arg("h"), py::arg("replications") = 10'000,
      py::arg("seed") = 1);

  m.def(
      "design_from_phase1",
      [](std::vector<double> const& data, std::string const& score, double target_shift, double alpha,
         std::string const& sigma) {
        Phase1Request request;
        request.score = parse_score_kind(score);
        request.target_shift = target_shift;
        request.alpha = alpha;
        request.kde.sigma = parse_sigma_method(sigma);
        auto const design = design_from_phase1(data, request);
        py::dict d;
        d["sigma_hat"] = design.sigma_hat;
        d["bandwidth"] = design.bandwidth;
        d["theta0_hat"] = design.theta0_hat;
        d["theta1_hat"] = design.theta1_hat;
        d["zeta"] = design.location.zeta;
        d["warning"] = design.location.warning ? py::object(py::str(*design.location.warning)) : py::none();
        d["zeta_up"] = design.dispersion.zeta_up;
        d["zeta_down"] = design.dispersion.zeta_down;
        return d;
      },
      py::arg("data"), py::arg("score") = "w", py::arg("target_shift") = 0.5, py::arg("alpha") = 0.5,
      py::arg("sigma") = "sd");

  py::class_<Monitor>(m, "Monitor")
      .def(py::init([](std::string const& config_json) { return Monitor(MonitorConfig::from_json(config_json)); }),
           py::arg("config_json"))
      .def("push", [](Monitor& monitor, double x) { return record_dict(monitor.push(x)); }, py::arg("x"))
      .def_property_readonly("count", &Monitor::count)
      .def_property_readonly("halted", &Monitor::halted)
      .def_property_readonly("zero_differences", &Monitor::zero_differences)
      .def("report", [](Monitor const& monitor) { return monitor_report(monitor); });

  m.def(
      "run_cli",
      [](std::vector<std::string> const& args, std::string const& stdin_text) {
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_cli(args, in, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "");
}
