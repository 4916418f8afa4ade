// Runs every acceptance criterion and prints one line per criterion.
// Usage: acceptance [id ...]   (default: all)

#include "fbscope/acceptance.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
  using namespace fbscope;
  cli::Context ctx;
  ctx.command = "verify";
  ctx.out = std::filesystem::temp_directory_path() / "fbscope_acceptance";
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
  if (!ids.empty()) {
    std::string joined;
    for (const auto& s : ids) joined += (joined.empty() ? "" : ",") + s;
    ctx.cfg.set("verify.criteria", joined);
  }
  auto start = std::chrono::steady_clock::now();
  const auto print = [&](const acceptance::Result& r) {
    const auto now = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(now - start).count();
    start = now;
    std::printf("[%s] criterion %2d %-26s %7.1fs  %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), secs,
                r.summary.c_str());
    std::fflush(stdout);
  };
  try {
    const int code = acceptance::cmd_verify(ctx, print);
    std::cout << "details: " << (ctx.out / "verify.json").string() << '\n';
    return code;
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << '\n';
    return 3;
  }
}
