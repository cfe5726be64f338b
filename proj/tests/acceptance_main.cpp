// Acceptance suite runner: one pass/fail line per criterion on stdout,
// nonzero exit when any selected criterion fails.

#include <cstdlib>
#include <iostream>
#include <string>

#include "bnblab/acceptance.hpp"

namespace {

void usage() {
  std::cout << "usage: acceptance [--only N[,M...]] [--artifacts DIR] [--workers W]\n"
               "                  [--budget-seconds S] [--batch-seeds A..B] [--batch-size NxM]\n";
}

}  // namespace

int main(int argc, char** argv) {
  bnblab::AcceptanceConfig config;
  config.artifacts_dir = "acceptance_artifacts";
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    const auto next = [&]() -> std::string {
      if (i + 1 >= argc) {
        usage();
        std::exit(2);
      }
      return argv[++i];
    };
    if (arg == "--only") {
      std::string list = next();
      size_t pos = 0;
      while (pos < list.size()) {
        const size_t comma = list.find(',', pos);
        const std::string tok =
            list.substr(pos, comma == std::string::npos ? comma : comma - pos);
        config.only.insert(std::stoi(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    } else if (arg == "--artifacts") {
      config.artifacts_dir = next();
    } else if (arg == "--workers") {
      config.workers = std::stoi(next());
    } else if (arg == "--budget-seconds") {
      config.blowup_budget_seconds = std::stod(next());
    } else if (arg == "--batch-seeds") {
      const std::string range = next();
      const size_t dots = range.find("..");
      if (dots == std::string::npos) {
        usage();
        return 2;
      }
      config.batch_seed_begin = std::stoull(range.substr(0, dots));
      config.batch_seed_end = std::stoull(range.substr(dots + 2));
    } else if (arg == "--batch-size") {
      const std::string size = next();
      const size_t x = size.find('x');
      if (x == std::string::npos) {
        usage();
        return 2;
      }
      config.batch_n = std::stoi(size.substr(0, x));
      config.batch_m = std::stoi(size.substr(x + 1));
    } else {
      usage();
      return 2;
    }
  }

  const auto results = bnblab::run_acceptance(config, std::cout);
  bool all_passed = !results.empty();
  for (const auto& r : results) all_passed = all_passed && r.passed;
  return all_passed ? 0 : 1;
}
