#include <iostream>

#include "src/app.hpp"

int main(int argc, char** argv) {
  return gwct::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
