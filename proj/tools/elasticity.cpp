#include "elast/bench.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
  return elast::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
