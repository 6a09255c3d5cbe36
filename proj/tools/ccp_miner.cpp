#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ccp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<std::string> config;
  if (const char* env = std::getenv("CCP_MINER_CONFIG")) config = env;
  return ccp::cli::run(std::move(args), std::cout, std::cerr, config);
}
