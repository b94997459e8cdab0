#include <string>
#include <vector>

#include "fox/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fox::cli::run_cli(std::move(args));
}
