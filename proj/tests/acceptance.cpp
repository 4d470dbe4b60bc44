#include <iostream>
#include <string>

#include "maal/verify.hpp"

int main(int argc, char** argv) {
  const std::string suite = argc > 1 ? argv[1] : "desk";
  try {
    return maal::run_suite(suite, std::cout).all_passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 2;
  }
}
