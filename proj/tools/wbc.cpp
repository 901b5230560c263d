#include <iostream>

#include "wbc/cli/app.hpp"

int main(int argc, char** argv) {
  return wbc::cli::runApp(argc, argv, {WBC_FIXTURE_DIR}, std::cout, std::cerr);
}
