// Pipeline driver: collect -> pretrain -> train -> merge -> eval -> explain,
// plus the bad-agent diagnosis study and a one-command demo.

#include <CLI11.hpp>
#include <iostream>

#include "protox/cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"prototype-based policy explainer pipeline"};
  app.require_subcommand(1);

  protox::cli::Options opts;
  app.add_option("--config", opts.config_file, "key-value config file");
  app.add_option("--seed", opts.seed, "master seed; all stage randomness derives from it");
  app.add_option("--workers", opts.workers, "worker thread cap (0 = all hardware threads)");
  app.add_option("--out", opts.out, "artifact directory");
  app.add_flag("--force", opts.force, "overwrite existing artifacts");
  std::vector<std::string> sets;
  app.add_option("--set", sets, "config override as section.key=value (repeatable)");

  bool list_keys = false;
  app.add_flag("--config-keys", list_keys, "print every config key with its default and exit");

  app.add_subcommand("collect", "run the scripted expert and save train/test demonstration sets");
  app.add_subcommand("pretrain", "train and freeze the self-supervised encoder");
  app.add_subcommand("train", "behavior-clone the prototype model on frozen encodings");
  app.add_subcommand("merge", "project-merge duplicate prototypes and save the merged model");
  app.add_subcommand("eval", "fidelity/sensitivity/complexity report on the test split");
  app.add_subcommand("explain", "render the explanation report bundle");
  app.add_subcommand("diagnose", "side-by-side good vs bad agent explanation report");
  app.add_subcommand("demo", "full pipeline end to end, including the diagnosis study");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (list_keys) {
    std::cout << protox::PipelineConfig::help();
    return 0;
  }
  opts.sets = sets;

  try {
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "collect") return protox::cli::cmd_collect(opts);
    if (cmd == "pretrain") return protox::cli::cmd_pretrain(opts);
    if (cmd == "train") return protox::cli::cmd_train(opts);
    if (cmd == "merge") return protox::cli::cmd_merge(opts);
    if (cmd == "eval") return protox::cli::cmd_eval(opts);
    if (cmd == "explain") return protox::cli::cmd_explain(opts);
    if (cmd == "diagnose") return protox::cli::cmd_diagnose(opts);
    if (cmd == "demo") return protox::cli::cmd_demo(opts);
    std::cerr << "unknown command\n";
    return 1;
  } catch (const protox::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
