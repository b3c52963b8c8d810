#include "nonclip/acceptance.hpp"

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

// Usage: nonclip_acceptance [id ...]
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  const auto results = nonclip::run_acceptance(ids, &std::cout);
  int failed = 0;
  for (const auto& r : results) failed += !r.pass;
  std::cout << (failed ? "FAILED " : "OK ") << results.size() - failed << "/" << results.size() << " criteria\n";
  return failed == 0 ? 0 : 1;
}
