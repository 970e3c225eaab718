#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace ssr {

//! Exit codes of the command-line tool.
enum ExitCode : int
{
  exit_ok = 0,
  exit_error = 1,
  exit_signal = 2
};

/*!
 * Run the ssrcusum command line. \p args excludes the program name; "-" as an
 * input path reads \p in.
 */
int run_cli(std::vector<std::string> const& args, std::istream& in, std::ostream& out, std::ostream& err);

//! "0.1,0.2", "0.1..0.5" (step 0.05) or "0.1..0.5:0.1".
std::vector<double> parse_number_list(std::string const& text);

}  // namespace ssr
