#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace ssr {

//! One ingested data row: a difference, or a pair whose difference is taken.
struct Observation
{
  std::size_t line = 0;
  double x = 0;
  std::optional<double> first;
  std::optional<double> second;
};

/*!
 * Streaming reader for delimited observation files.
 *
 * Fields are separated by commas, semicolons, tabs or spaces. Blank lines and
 * lines starting with '#' are skipped. A first non-comment row with a
 * non-numeric field is taken as a header. Rows carry one value x or a pair
 * (v1, v2) with x = v1 - v2; malformed rows throw InputError naming the line.
 */
class ObservationReader
{
public:
  explicit ObservationReader(std::istream& in, std::string source = "input");

  std::optional<Observation> next();
  std::vector<double> read_all();

private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
  bool seen_row_ = false;
};

std::vector<std::string> split_fields(std::string const& line);

//! Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string const& text);

}  // namespace ssr
