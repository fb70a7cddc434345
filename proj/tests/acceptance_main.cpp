// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Usage: perptail_acceptance [--quick] [--expectations PATH]

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "perptail/acceptance.hpp"

int main(int argc, char** argv) {
  perptail::AcceptanceOptions options;
  std::string expectations_path;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      options.quick = true;
    } else if (std::strcmp(argv[i], "--expectations") == 0 && i + 1 < argc) {
      expectations_path = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--quick] [--expectations PATH]\n", argv[0]);
      return 1;
    }
  }
  if (!expectations_path.empty()) {
    std::ifstream in(expectations_path);
    if (!in) {
      std::fprintf(stderr, "cannot read expectations file %s\n", expectations_path.c_str());
      return 1;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    options.expectations_json = ss.str();
  }

  const auto results = perptail::run_acceptance(options);
  bool all_pass = true;
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::printf("%s  %2d  %-24s %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str());
  }
  std::printf("%s (%zu criteria)\n", all_pass ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
              results.size());
  return all_pass ? 0 : 1;
}
