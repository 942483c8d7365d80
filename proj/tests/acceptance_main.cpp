#include <cstdio>

#include "blowup/acceptance.hpp"

using namespace blowup::acceptance;

int main() {
  const auto ids = suite_criteria("all");
  auto print = [](const CriterionResult& r) {
    std::printf("%s\n", format_line(r).c_str());
    std::fflush(stdout);
  };
  auto results = run_criteria(ids, 1, print);
  const auto det = determinism(results);
  print(det);
  results.push_back(det);
  int failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  std::printf("%d of %zu acceptance criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
