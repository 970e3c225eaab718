#include "ssr/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "ssr/error.hpp"

namespace ssr {

std::vector<std::string> split_fields(std::string const& line)
{
  std::vector<std::string> fields;
  std::string current;
  bool comma_separated = line.find_first_of(",;") != std::string::npos;
  auto flush = [&](bool keep_empty) {
    if (!current.empty() || keep_empty)
      fields.push_back(current);
    current.clear();
  };
  for (char c : line)
  {
    if (c == ',' || c == ';')
      flush(true);
    else if (c == ' ' || c == '\t' || c == '\r')
    {
      if (!comma_separated)
        flush(false);
    }
    else
      current.push_back(c);
  }
  flush(comma_separated);
  return fields;
}

std::string format_double(double value)
{
  if (std::isnan(value))
    return "nan";
  if (std::isinf(value))
    return value > 0 ? "inf" : "-inf";
  std::array<char, 32> buffer{};
  auto [end, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  return std::string(buffer.data(), end);
}

double parse_double(std::string const& text)
{
  if (text == "nan")
    return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf")
    return std::numeric_limits<double>::infinity();
  if (text == "-inf")
    return -std::numeric_limits<double>::infinity();
  double value = 0;
  char const* begin = text.data();
  if (!text.empty() && text.front() == '+')
    ++begin;
  auto [end, ec] = std::from_chars(begin, text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || begin == end)
    throw InputError("not a number: '" + text + "'");
  return value;
}

ObservationReader::ObservationReader(std::istream& in, std::string source)
    : in_(in), source_(std::move(source))
{
}

std::optional<Observation> ObservationReader::next()
{
  std::string text;
  while (std::getline(in_, text))
  {
    ++line_;
    auto const start = text.find_first_not_of(" \t\r");
    if (start == std::string::npos || text[start] == '#')
      continue;
    auto const fields = split_fields(text.substr(start));
    auto fail = [&](std::string const& why) -> InputError {
      return InputError(source_ + ":" + std::to_string(line_) + ": " + why);
    };
    if (fields.empty() || fields.size() > 2)
      throw fail("expected one value or a pair, got " + std::to_string(fields.size()) + " fields");
    std::vector<double> values;
    try
    {
      for (auto const& f : fields)
        values.push_back(parse_double(f));
    }
    catch (InputError const& e)
    {
      if (!seen_row_)
      {
        seen_row_ = true;
        continue;  // header
      }
      throw fail(e.what());
    }
    seen_row_ = true;
    for (double v : values)
    {
      if (!std::isfinite(v))
        throw fail("non-finite value");
    }
    Observation obs;
    obs.line = line_;
    if (values.size() == 2)
    {
      obs.first = values[0];
      obs.second = values[1];
      obs.x = values[0] - values[1];
    }
    else
    {
      obs.x = values[0];
    }
    return obs;
  }
  return std::nullopt;
}

std::vector<double> ObservationReader::read_all()
{
  std::vector<double> out;
  while (auto obs = next())
    out.push_back(obs->x);
  return out;
}

}  // namespace ssr
