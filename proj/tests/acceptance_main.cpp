// Runs acceptance criteria by name or number; no argument runs all of them.
// Exit status is 0 only if every selected criterion passes.

#include <cstdio>
#include <cstdlib>
#include <string>

#include "qsa/acceptance.hpp"

int main(int argc, char** argv) {
  namespace acc = qsa::acceptance;
  const auto& list = acc::criteria();
  bool all_pass = true;
  bool matched = false;
  for (std::size_t i = 0; i < list.size(); ++i) {
    bool selected = argc < 2;
    for (int a = 1; a < argc; ++a)
      selected = selected || list[i].first == argv[a] || std::to_string(i + 1) == argv[a];
    if (!selected) continue;
    matched = true;
    try {
      const auto r = list[i].second({});
      acc::print(r);
      all_pass = all_pass && r.pass;
    } catch (const std::exception& e) {
      std::printf("[FAIL] criterion %zu: %s raised: %s\n", i + 1, list[i].first.c_str(), e.what());
      all_pass = false;
    }
  }
  if (!matched) {
    std::fprintf(stderr, "no criterion matches the arguments\n");
    return 2;
  }
  return all_pass ? 0 : 1;
}
