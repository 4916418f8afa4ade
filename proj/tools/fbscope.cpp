#include "fbscope/acceptance.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int run(const std::string& command, fbscope::cli::Context& ctx, bool list) {
  using namespace fbscope;
  if (command == "solve") return cli::cmd_solve(ctx);
  if (command == "functionals") return cli::cmd_functionals(ctx);
  if (command == "classify") return cli::cmd_classify(ctx);
  if (command == "cover") return cli::cmd_cover(ctx);
  if (list) {
    for (const auto& [id, name] : acceptance::Suite::catalogue()) std::cout << id << ' ' << name << '\n';
    return cli::kExitOk;
  }
  return acceptance::cmd_verify(ctx, [](const acceptance::Result& r) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": " << r.summary << std::endl;
  });
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fbscope;
  CLI::App app{"Free-boundary diagnostics: solve, functionals, classify, cover, verify"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool list = false, labels_only = false;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--set", overrides, "override a config key (section.key=value)")->take_all();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "seed for randomized probes");
  };
  for (const char* name : {"solve", "functionals", "classify", "cover", "verify"}) common(app.add_subcommand(name));
  app.get_subcommand("classify")->add_flag("--labels-only", labels_only, "boundary.csv with coordinates and labels only");
  app.get_subcommand("verify")->add_flag("--list", list, "print criterion ids and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    cli::Context ctx;
    ctx.command = command;
    if (!config_path.empty()) ctx.cfg = cli::RunConfig::from_file(config_path);
    for (const auto& kv : overrides) ctx.cfg.apply_override(kv);
    if (app.get_subcommands().front()->count("--seed") == 0 && ctx.cfg.has("run.seed"))
      seed = static_cast<std::uint64_t>(ctx.cfg.integer("run.seed", 0));
    ctx.seed = seed;
    ctx.out = !out_dir.empty() ? out_dir : ctx.cfg.str("run.out", "fbscope_out");
    ctx.labels_only = labels_only;
    return run(command, ctx, list);
  } catch (const cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const cli::SolverFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return cli::kExitSolver;
  } catch (const ParameterError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitSolver;
  }
}
