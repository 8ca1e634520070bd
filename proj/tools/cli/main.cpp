#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  bargain::cli::CliContext ctx{std::cout, std::cerr};
  return bargain::cli::run_cli(args, ctx);
}
