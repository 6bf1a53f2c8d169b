#include <iostream>

#include <hymath/cli.hpp>

int main(int argc, char** argv)
{
  return hymath::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
