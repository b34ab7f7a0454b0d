// Runs every acceptance criterion at full size and prints one line per
// criterion. Exit status is nonzero if any criterion fails.

#include "fracperc/verify.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
  fracperc::verify::VerifyOptions options;
  if (argc > 1) options.seed = std::strtoull(argv[1], nullptr, 10);

  int failed = 0;
  for (const auto& group : fracperc::verify::run_all(options)) {
    std::printf("%s criterion %d: %s [%zu checks, %.2f s]\n", group.passed() ? "PASS" : "FAIL",
                group.id, group.name.c_str(), group.checks.size(), group.seconds);
    for (const auto& check : group.checks) {
      if (!check.passed) {
        std::printf("    %s: %s\n", check.name.c_str(), check.detail.c_str());
      }
    }
    if (!group.passed()) ++failed;
  }
  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
