#include <string>
#include <vector>

#include "addpp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return addpp::cli::run(args);
}
