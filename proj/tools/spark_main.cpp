#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spark/cli/commands.hpp"
#include "spark/error.hpp"

namespace {

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::string k;
  std::string k_list;
  std::string seed;
  std::string store;
  std::string checkpoint;
  std::string out;
  std::string input;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key = value config file");
  cmd->add_option("--set", f.sets, "override one key, as key=value (repeatable)")->allow_extra_args(false);
  cmd->add_option("--k", f.k, "neighbors to retrieve (model.k_retrieve)");
  cmd->add_option("--k-list", f.k_list, "comma-separated k values for eval (run.k_list)");
  cmd->add_option("--seed", f.seed, "run seed (run.seed)");
  cmd->add_option("--store", f.store, "vector store path (run.store)");
  cmd->add_option("--checkpoint", f.checkpoint, "checkpoint path (run.checkpoint)");
  cmd->add_option("--out", f.out, "output path (run.out)");
}

spark::cli::RunConfig resolve(const Flags& f) {
  spark::cli::RunConfig c = f.config.empty() ? spark::cli::RunConfig{} : spark::cli::load_config(f.config);
  for (const auto& s : f.sets) spark::cli::apply_override(c, s);
  // Dedicated flags win over --set.
  if (!f.k.empty()) c.set("model.k_retrieve", f.k);
  if (!f.k_list.empty()) c.set("run.k_list", f.k_list);
  if (!f.seed.empty()) c.set("run.seed", f.seed);
  if (!f.store.empty()) c.set("run.store", f.store);
  if (!f.checkpoint.empty()) c.set("run.checkpoint", f.checkpoint);
  if (!f.out.empty()) c.set("run.out", f.out);
  c.validate();
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Spectral dual-path detector of generated images with retrieval and continual learning.");
  app.require_subcommand(1);
  Flags flags;
  const char* names[] = {"train", "index", "infer", "eval", "incr", "stats", "dump-embeddings"};
  const char* help[] = {
      "train on data.train and write a checkpoint",
      "embed data.index (or data.train) and append it to the store",
      "classify one image or SYNTH:profile:seed source",
      "per-set accuracy for every k in run.k_list",
      "run one continual phase per data.phases manifest",
      "parameter count per module",
      "write SPKE embeddings and a TSV of ids and labels",
  };
  for (int i = 0; i < 7; ++i) {
    CLI::App* cmd = app.add_subcommand(names[i], help[i]);
    add_common(cmd, flags);
    if (std::string(names[i]) == "infer") cmd->add_option("input", flags.input, "image path or SYNTH:profile:seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const spark::cli::RunConfig config = resolve(flags);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "train") {
      spark::cli::cmd_train(config, std::cout);
    } else if (cmd == "index") {
      spark::cli::cmd_index(config, std::cout);
    } else if (cmd == "infer") {
      spark::cli::cmd_infer(config, flags.input, std::cout);
    } else if (cmd == "eval") {
      spark::cli::cmd_eval(config, std::cout);
    } else if (cmd == "incr") {
      spark::cli::cmd_incr(config, std::cout);
    } else if (cmd == "stats") {
      spark::cli::cmd_stats(config, std::cout);
    } else {
      spark::cli::cmd_dump_embeddings(config, std::cout);
    }
  } catch (const spark::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return spark::cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
