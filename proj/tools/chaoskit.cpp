#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "chaoskit/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;

int run(chaoskit::Experiment experiment, const std::string& config_path, const std::uint64_t* seed,
        const std::string* out) {
  chaoskit::ExperimentConfig cfg;
  try {
    cfg = chaoskit::load_config(config_path, experiment);
  } catch (const chaoskit::Error& e) {
    std::cerr << "chaoskit: " << e.what() << '\n';
    return kExitConfig;
  }
  if (seed) cfg.seed = *seed;
  if (out) cfg.out = *out;

  chaoskit::RunResult result;
  try {
    result = chaoskit::run_experiment(cfg);
  } catch (const chaoskit::ConfigError& e) {
    std::cerr << "chaoskit: " << e.what() << '\n';
    return kExitConfig;
  } catch (const chaoskit::Error& e) {
    std::cerr << "chaoskit: " << chaoskit::experiment_name(experiment) << " failed: " << e.what() << '\n';
    return 1;
  }
  chaoskit::write_outputs(result, cfg.out);

  for (const auto& f : result.failures) std::cerr << "FAIL " << f << '\n';
  std::cout << chaoskit::experiment_name(experiment) << ": " << result.rows.size() << " rows, "
            << result.failures.size() << " failures; reports in " << cfg.out.string() << '\n';
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chaos decompositions and fourth-moment diagnostics for Markov diffusion generators"};
  app.require_subcommand(1);

  struct Options {
    std::string config;
    std::uint64_t seed = 0;
    std::string out;
  };
  const char* names[] = {"chaos-check", "fmt-verify", "joint-verify", "bound-check", "thm33-check",
                         "product-formula-check"};
  std::vector<std::pair<CLI::App*, Options>> subs;
  subs.reserve(std::size(names));
  std::vector<CLI::Option*> seed_opts, out_opts;
  for (const char* name : names) {
    subs.emplace_back(app.add_subcommand(name), Options{});
    auto& [sub, opts] = subs.back();
    sub->add_option("--config", opts.config, "JSON config file")->required()->check(CLI::ExistingFile);
    seed_opts.push_back(sub->add_option("--seed", opts.seed, "override the config seed"));
    out_opts.push_back(sub->add_option("--out", opts.out, "output directory for report.json / report.csv"));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  for (std::size_t k = 0; k < subs.size(); ++k) {
    auto& [sub, opts] = subs[k];
    if (!sub->parsed()) continue;
    const auto experiment = chaoskit::experiment_from_name(names[k]);
    return run(experiment, opts.config, seed_opts[k]->count() ? &opts.seed : nullptr,
               out_opts[k]->count() ? &opts.out : nullptr);
  }
  return kExitConfig;
}
