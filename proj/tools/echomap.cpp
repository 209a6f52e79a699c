#include <iostream>
#include <string>
#include <vector>

#include "echomap/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);
  return echomap::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
