#include <iostream>
#include <string>
#include <vector>

#include <netcurrency/cli.hpp>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return netcurrency::cli::run_cli(args, std::cout, std::cerr);
}
