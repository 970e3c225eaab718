#include <iostream>
#include <string>
#include <vector>

#include "ssr/cli.hpp"

int main(int argc, char** argv)
{
  std::vector<std::string> args(argv + 1, argv + argc);
  return ssr::run_cli(args, std::cin, std::cout, std::cerr);
}
