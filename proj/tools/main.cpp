#include <string>
#include <vector>

#include "eapo/cli.hpp"

int main(int argc, char** argv) {
  return eapo::cli::run(std::vector<std::string>(argv, argv + argc));
}
