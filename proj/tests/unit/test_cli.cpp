#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "ssr/cli.hpp"
#include "ssr/io.hpp"
#include "ssr/monitor.hpp"

using namespace ssr;

namespace {

struct Outcome
{
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> const& args, std::string const& input = "")
{
  std::istringstream in(input);
  std::ostringstream out, err;
  int const code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(std::string const& name)
{
  auto const dir = std::filesystem::temp_directory_path() / "ssrcusum-tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("number lists")
{
  CHECK(parse_number_list("0.1,0.2") == std::vector<double>{0.1, 0.2});
  auto const range = parse_number_list("0.1..0.5");
  REQUIRE(range.size() == 9);
  CHECK(range.back() == doctest::Approx(0.5));
  CHECK(parse_number_list("100..500:200").size() == 3);
  CHECK_THROWS(parse_number_list("0.1..x"));
}

TEST_CASE("simulate then monitor signals with exit code 2")
{
  auto const sim = cli({"simulate", "--n", "400", "--tau", "214", "--shift", "0.622", "--sd", "0.6", "--seed", "3"});
  REQUIRE(sim.code == exit_ok);
  auto const mon = cli({"monitor", "--zeta", "0.15", "--h", "14.06", "--two-sided"}, sim.out);
  CHECK(mon.code == exit_signal);
  CHECK(mon.out.find("signal\tlocation") != std::string::npos);
  CHECK(mon.out.find("changepoint=") != std::string::npos);
}

TEST_CASE("all-zero input does not signal and warns")
{
  std::string zeros;
  for (int k = 0; k < 500; ++k)
    zeros += "0\n";
  auto const r = cli({"monitor", "--zeta", "0.1", "--h", "5", "--two-sided"}, zeros);
  CHECK(r.code == exit_ok);
  CHECK(r.out.find("signal\tnone") != std::string::npos);
  CHECK((r.out + r.err).find("zero differences") != std::string::npos);
}

TEST_CASE("pair rows become differences")
{
  auto const r = cli({"monitor", "--zeta", "0.1", "--h", "5", "--format", "records"}, "3.0,2.5\n");
  REQUIRE(r.code == exit_ok);
  std::istringstream records(r.out);
  auto const parsed = read_records(records);
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].x == doctest::Approx(0.5));
}

TEST_CASE("errors exit with code 1 and name the line")
{
  auto const bad_row = cli({"monitor", "--zeta", "0.1", "--h", "5"}, "1\n1,2,3\n");
  CHECK(bad_row.code == exit_error);
  CHECK(bad_row.err.find(":2:") != std::string::npos);

  CHECK(cli({"monitor", "--zeta", "0.1"}, "1\n").code == exit_error);
  CHECK(cli({"monitor", "--score", "median", "--zeta", "0.1", "--h", "1"}, "1\n").code == exit_error);
  CHECK(cli({"theta", "--dist", "gamma"}).code == exit_error);
  CHECK(cli({"bogus"}).code == exit_error);
  CHECK(cli({"monitor", "--input", "/nonexistent/file", "--zeta", "0.1", "--h", "1"}).code == exit_error);
  CHECK(cli({"--help"}).code == exit_ok);
}

TEST_CASE("path file round-trips and matches stdout records")
{
  auto const sim = cli({"simulate", "--n", "300", "--seed", "8"});
  auto const path = scratch("path.tsv");
  auto const r = cli({"monitor", "--zeta", "0.25", "--h", "7.25", "--two-sided", "--disp-zeta-up", "0.2",
                      "--disp-h-up", "10.29", "--continue", "-o", path.string(), "--format", "records"},
                     sim.out);
  REQUIRE(r.code != exit_error);
  std::ifstream file(path);
  std::stringstream contents;
  contents << file.rdbuf();
  CHECK(contents.str() == r.out);
  std::istringstream again(contents.str());
  auto const records = read_records(again);
  CHECK(records.size() == 300);
  for (std::size_t k = 0; k < records.size(); ++k)
    CHECK(records[k].n == k + 1);
  std::filesystem::remove(path);
}

TEST_CASE("json monitor config")
{
  auto const config = scratch("config.json");
  std::ofstream(config) << R"({"location": {"score": "w", "zeta": 0.25, "h": 2.0}})";
  auto const r = cli({"monitor", "--config", config.string()}, "1\n1\n1\n1\n1\n");
  CHECK(r.code == exit_signal);
  std::filesystem::remove(config);
}

TEST_CASE("theta command")
{
  auto const r = cli({"theta", "--dist", "t3", "--score", "w"});
  REQUIRE(r.code == exit_ok);
  CHECK(r.out.find("theta0(w)\t1.37") != std::string::npos);
  auto const j = cli({"theta", "--dist", "normal", "--format", "json"});
  auto const parsed = nlohmann::json::parse(j.out);
  CHECK(parsed.at("theta0").get<double>() == doctest::Approx(0.9772).epsilon(1e-4));

  auto const sim = cli({"simulate", "--n", "500", "--sd", "2", "--seed", "4"});
  auto const design = cli({"theta", "--input", "-", "--target-shift", "0.5"}, sim.out);
  REQUIRE(design.code == exit_ok);
  CHECK(design.out.find("sigma_hat") != std::string::npos);
}

TEST_CASE("calibrate and arl commands are seed reproducible")
{
  std::vector<std::string> const cal{"calibrate", "--score", "w", "--zeta", "0.5", "--arl0", "100",
                                     "--reps", "2000", "--verify-reps", "4000", "--seed", "5", "--format", "json"};
  auto const a = cli(cal);
  auto const b = cli(cal);
  REQUIRE(a.code == exit_ok);
  auto const ja = nlohmann::json::parse(a.out);
  auto const jb = nlohmann::json::parse(b.out);
  CHECK(ja.at("h") == jb.at("h"));
  CHECK(ja.at("achieved_arl") == jb.at("achieved_arl"));
  CHECK(ja.at("seed").get<int>() == 5);

  std::vector<std::string> const arl{"arl", "--dist", "normal", "--shift", "1", "--tau", "50", "--zeta", "0.25",
                                     "--h", "7.25", "--reps", "2000", "--seed", "9", "--format", "json"};
  auto const x = cli(arl);
  auto const y = cli(arl);
  REQUIRE(x.code == exit_ok);
  CHECK(x.out == y.out);
  CHECK(cli({"arl", "--scenario", "nope"}).code == exit_error);
}
