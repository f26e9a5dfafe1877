#include "addreg/cli.hpp"

#include <iostream>

int
main(int argc, char** argv)
{
  return addreg::run_cli(argc, argv, std::cout, std::cerr);
}
