#include <iostream>

#include "rodlqg/cli_app.h"

int main(int argc, char** argv) {
  return rodlqg::RunCommandLine(argc, argv, std::cout, std::cerr);
}
