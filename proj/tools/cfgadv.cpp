// Command-line driver for the CFG adversarial-attack pipeline.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cfgadv/config.hpp"
#include "cfgadv/error.hpp"
#include "cfgadv/pipeline.hpp"

namespace {

const std::map<std::string, std::string>& descriptions() {
  static const std::map<std::string, std::string> d = {
      {"gen-corpus", "Generate the synthetic labeled CFG corpus into <out>/corpus"},
      {"extract", "Extract the 23 graph features, split train/test and fit the normalizer"},
      {"train", "Train the MLP classifier and evaluate it on the test split"},
      {"attack-osaa", "Run the six feature-space attacks against test-split malware"},
      {"attack-gea", "Run graph embedding attacks with minimum/median/maximum targets"},
      {"density-sweep", "Run Mal2Ben graph embedding with edges added to the target"},
      {"report", "Aggregate results into human-readable tables"},
  };
  return d;
}

cfgadv::PipelineConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  cfgadv::PipelineConfig cfg;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw cfgadv::UsageError("cannot open config file " + path);
    cfgadv::apply_config_text(cfg, in, path);
  }
  cfgadv::apply_overrides(cfg, overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cfgadv: graph-feature malware classifier and adversarial attack experiments"};
  app.set_version_flag("--version", std::string(CFGADV_VERSION));
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::uint64_t seed = 42;
  std::string out = "out";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "INI-style config file with per-module sections");
  app.add_option("--seed", seed, "Run seed for corpus, split, training and sampling")->capture_default_str();
  app.add_option("--out", out, "Output directory for all artifacts")->capture_default_str();
  app.add_option("--threads", threads, "Maximum worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--set", overrides, "Override one config value: section.key=value (repeatable)");

  for (const auto& [name, fn] : cfgadv::subcommands()) app.add_subcommand(name, descriptions().at(name));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cfgadv::RunContext ctx;
    ctx.config = load_config(config_path, overrides);
    ctx.config_path = config_path;
    ctx.seed = seed;
    ctx.out = out;
    ctx.threads = threads;
    for (const auto& [name, fn] : cfgadv::subcommands()) {
      if (!app.got_subcommand(name)) continue;
      const auto manifest = fn(ctx);
      std::cout << name << ": ok";
      for (const auto& o : manifest.outputs) std::cout << "\n  " << (ctx.out / o).string();
      std::cout << '\n';
    }
  } catch (const cfgadv::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return cfgadv::UsageError::kExitCode;
  } catch (const cfgadv::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return cfgadv::DataError::kExitCode;
  } catch (const cfgadv::InvariantError& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return cfgadv::InvariantError::kExitCode;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return cfgadv::DataError::kExitCode;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return cfgadv::InvariantError::kExitCode;
  }
  return 0;
}
