#include <iostream>

#include "cfmm/app.hpp"

int main(int argc, char** argv) {
  return cfmm::app::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
