#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "zakharov/harness/run.hpp"

int main(int argc, char** argv) {
  using namespace zakharov::harness;
  CLI::App app{"Pseudospectral Zakharov-system lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ZAKHAROV_VERSION);

  RunOptions opt;
  std::string out;
  std::uint64_t seed = 0;
  const char* help = "Run the experiment described by a JSON config";
  for (const auto& name : experiment_kinds()) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON config file")->required();
    sub->add_option("--out", out, "Output directory (overrides output.dir)");
    sub->add_option("--seed", seed, "Seed (overrides data.seed)");
    sub->add_option("--threads", opt.threads, "Worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  opt.subcommand = sub->get_name();
  if (sub->count("--out")) opt.out = out;
  if (sub->count("--seed")) opt.seed = seed;
  return run(opt, std::cout, std::cerr);
}
