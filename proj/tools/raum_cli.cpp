#include <iostream>
#include <string>
#include <vector>

#include "raum/cli.h"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return raum::RunCli(args, std::cout, std::cerr);
}
