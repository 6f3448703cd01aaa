#include <iostream>

#include "efg/cli.hpp"

int main(int argc, char** argv)
{
  return efg::run_cli(argc, argv, std::cout, std::cerr);
}
